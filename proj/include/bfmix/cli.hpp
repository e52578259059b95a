#pragma once

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bfmix/stats.hpp"

namespace bfmix::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,  // I/O and other runtime failures
    kUsage = 2,
    kDomain = 3,
    kNumerical = 4,
    kPathology = 5,
};

/// Malformed data file; the message names the offending line.
class DataParseError : public std::domain_error {
public:
    DataParseError(const std::string& what, int line) : std::domain_error(what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// One real per line; blank lines and `#` comments are ignored.
Dataset read_data_file(const std::filesystem::path& path);
Dataset parse_data(const std::string& text);

/// Entry point; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bfmix::cli
