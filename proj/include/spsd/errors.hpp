#pragma once

#include <stdexcept>
#include <string>

namespace spsd {

enum class ErrorKind {
    dimension,
    domain,
    not_hessenberg,
    spectrum,        // eigenvalue moduli outside (0,1)
    singular,
    non_convergence,
    degenerate_orbit,
    blow_up,
    assumption,
    positivity,
    config,
};

[[nodiscard]] const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace spsd
