#pragma once

#include <stdexcept>
#include <string>

namespace availsim {

// Exit codes used by the CLI: 0 success, 1 validation, 2 stage failure, 3 I/O.
enum class ExitCode : int {
    ok = 0,
    validation = 1,
    stage_failure = 2,
    io = 3,
};

// Malformed or inconsistent input: bad JSON shape, unknown service, k out of
// range, and so on.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem trouble: unreadable input, unwritable output.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// A pipeline stage failed; carries the stage name for the error report.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& msg, ExitCode code)
        : std::runtime_error(msg), stage_(std::move(stage)), code_(code) {}

    const std::string& stage() const { return stage_; }
    ExitCode code() const { return code_; }

private:
    std::string stage_;
    ExitCode code_;
};

} // namespace availsim
