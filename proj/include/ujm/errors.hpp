#pragma once

#include <stdexcept>
#include <string>

namespace ujm {

// Root of the library's failure hierarchy. Two branches matter to callers:
// domain_error covers numerical/model failures (CLI exit code 1), usage_error
// covers bad files, bad flags and malformed configuration (CLI exit code 2).
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class domain_error : public error {
public:
    using error::error;
};

class usage_error : public error {
public:
    using error::error;
};

// Evaluation at (or numerically indistinguishable from) the pole of the
// characteristic, x = -c, or the memristor singularity i = -alpha.
class singular_input_error : public domain_error {
public:
    using domain_error::domain_error;
};

class non_finite_error : public domain_error {
public:
    using domain_error::domain_error;
};

// Trajectory norm exceeded the configured bound during integration.
class blow_up_error : public domain_error {
public:
    using domain_error::domain_error;
};

class no_root_error : public domain_error {
public:
    using domain_error::domain_error;
};

class too_few_samples_error : public domain_error {
public:
    using domain_error::domain_error;
};

class too_few_maxima_error : public domain_error {
public:
    using domain_error::domain_error;
};

// A tangent vector collapsed below representable scale between
// re-orthonormalizations.
class degenerate_tangent_error : public domain_error {
public:
    using domain_error::domain_error;
};

class non_convergence_error : public domain_error {
public:
    using domain_error::domain_error;
};

class rank_deficient_error : public domain_error {
public:
    using domain_error::domain_error;
};

class zero_variance_error : public domain_error {
public:
    using domain_error::domain_error;
};

// Malformed input file; carries a 1-based line number when known.
class parse_error : public usage_error {
public:
    explicit parse_error(const std::string& msg) : usage_error(msg), line_(0) {}
    parse_error(const std::string& msg, std::size_t line)
        : usage_error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class config_error : public usage_error {
public:
    using usage_error::usage_error;
};

} // namespace ujm
