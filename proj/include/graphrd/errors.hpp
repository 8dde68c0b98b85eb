#pragma once

#include <stdexcept>
#include <string>

namespace graphrd {

// Invalid user input (constraints, configs, files). CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// An exact enumeration would exceed its size guard. CLI exit code 3.
class ExplosionError : public std::runtime_error {
public:
    ExplosionError(const std::string& what, double estimated_size)
        : std::runtime_error(what), estimated_size_(estimated_size) {}

    double estimated_size() const noexcept { return estimated_size_; }

private:
    double estimated_size_;
};

// An empirical measure reaches outside the truncated kernel support, which
// makes rate functionals against that kernel meaningless.
class TruncationError : public std::runtime_error {
public:
    explicit TruncationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace graphrd
