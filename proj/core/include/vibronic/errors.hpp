#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace vib {

// Base error carrying the originating module name. The CLI maps ConfigError
// to exit code 2 and every other Error to exit code 1.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error("[" + module + "] " + what), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

struct ConfigError : Error {
    ConfigError(std::string module, const std::string& what) : Error(std::move(module), what) {}
};

struct DomainError : Error {
    DomainError(std::string module, const std::string& what) : Error(std::move(module), what) {}
};

struct NumericError : Error {
    NumericError(std::string module, const std::string& what) : Error(std::move(module), what) {}
};

struct CalibrationError : Error {
    CalibrationError(std::string module, const std::string& what) : Error(std::move(module), what) {}
};

struct ExtractionError : Error {
    ExtractionError(std::string module, const std::string& what) : Error(std::move(module), what) {}
};

struct AssemblyError : Error {
    AssemblyError(std::string module, const std::string& what) : Error(std::move(module), what) {}
};

}  // namespace vib
