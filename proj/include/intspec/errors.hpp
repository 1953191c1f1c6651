#pragma once

#include <stdexcept>
#include <string>

namespace intspec {

struct InvalidFieldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised by inverse_curl when the input has a mean mode or divergence.
struct NotExactError : std::runtime_error {
    NotExactError(const std::string& what, double mean_norm, double divergence)
        : std::runtime_error(what), mean_norm(mean_norm), divergence(divergence) {}
    double mean_norm;
    double divergence;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResampleRequiredError : std::runtime_error {
    ResampleRequiredError(const std::string& what, int file_n, int expected_n)
        : std::runtime_error(what), file_n(file_n), expected_n(expected_n) {}
    int file_n;
    int expected_n;
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GeometryError : std::runtime_error {
    GeometryError(const std::string& what, double max_feasible)
        : std::runtime_error(what), max_feasible(max_feasible) {}
    double max_feasible;
};

struct InfeasibleEnergyError : std::runtime_error {
    InfeasibleEnergyError(const std::string& what, double threshold)
        : std::runtime_error(what), threshold(threshold) {}
    double threshold;
};

struct CflError : std::runtime_error {
    CflError(const std::string& what, double cfl)
        : std::runtime_error(what), cfl(cfl) {}
    double cfl;
};

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace intspec
