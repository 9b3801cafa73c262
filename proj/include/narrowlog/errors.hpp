#ifndef NARROWLOG_ERRORS_HPP
#define NARROWLOG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace narrowlog {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input was zero to the stated precision where a nonzero value is required.
struct ZeroInput : Error {
    explicit ZeroInput(const std::string& msg = "zero input") : Error(msg) {}
};

// A 2-adic decision could not be made at the working precision.
struct PrecisionExhausted : Error {
    explicit PrecisionExhausted(const std::string& msg = "precision exhausted")
        : Error(msg) {}
};

// Newton lifting precondition v(f(x0)) > 2 v(f'(x0)) failed.
struct NotLiftable : Error {
    explicit NotLiftable(const std::string& msg = "not liftable") : Error(msg) {}
};

// Local field degree outside the built-in bound.
struct UnsupportedDegree : Error {
    explicit UnsupportedDegree(const std::string& msg = "unsupported degree")
        : Error(msg) {}
};

// A finiteness check that depends on the generalized Gross conjecture failed
// at every precision tried.  Mathematically noteworthy; never silenced.
struct GrossCheckFailed : Error {
    explicit GrossCheckFailed(const std::string& msg) : Error(msg) {}
};

struct BoundExceeded : Error {
    explicit BoundExceeded(const std::string& msg = "bound exceeded") : Error(msg) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Structure deduction received inputs that admit no solution.
struct Inconsistent : Error {
    explicit Inconsistent(const std::string& msg) : Error(msg) {}
};

// Exceptionality test needs an ingested flag (degree too large to decide).
struct NeedsFlag : Error {
    explicit NeedsFlag(const std::string& msg = "needs ingested exceptional flag")
        : Error(msg) {}
};

}  // namespace narrowlog

#endif
