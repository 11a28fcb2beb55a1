#pragma once

#include <stdexcept>
#include <string>

namespace elastores {

// Exit codes reported by the CLI. Library code throws the typed variants
// below; main() maps them onto these process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitMesh = 3,
    kExitNumerical = 4,
    kExitVerification = 5,
};

class Error : public std::runtime_error {
public:
    Error(const std::string& msg, int code) : std::runtime_error(msg), code_(code) {}
    int exit_code() const { return code_; }

private:
    int code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg, kExitConfig) {}
};

class MeshError : public Error {
public:
    explicit MeshError(const std::string& msg) : Error(msg, kExitMesh) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg, kExitNumerical) {}
};

}  // namespace elastores
