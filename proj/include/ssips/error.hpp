#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ssips {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument or configuration value does not hold.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A cell cap or function-evaluation budget would be exceeded.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

/// Integration produced a non-finite state.
class NumericalAbort : public Error {
public:
    using Error::Error;
};

class IoFailure : public Error {
public:
    using Error::Error;
};

/// Resource caps shared by all modules.
///
/// `max_cells` bounds k^m for any enumerated level; `max_evaluations` bounds
/// the number of user-function calls one operation may issue. The budget can
/// be overridden process-wide with the SSIPS_EVAL_BUDGET environment variable.
struct Limits {
    std::uint64_t max_cells = std::uint64_t{1} << 24;
    std::uint64_t max_evaluations = 2'000'000'000ULL;
};

/// Limits with the environment override applied.
const Limits& default_limits();

}  // namespace ssips
