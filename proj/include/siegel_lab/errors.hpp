#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace siegel_lab {

/// Table or loop would exceed the configured memory/work budget.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Two tables (or a table and a requested range) disagree on their limit.
class LimitMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// Process-wide limits. Entries are table slots, not bytes.
struct Budget {
    std::int64_t max_table_entries = 200'000'000;
    std::int64_t max_lvalue_terms = 2'000'000'000;
};

inline Budget& budget() {
    static Budget b;
    return b;
}

inline void check_capacity(std::int64_t entries, const char* what) {
    if (entries > budget().max_table_entries) {
        throw CapacityError(std::string(what) + ": " + std::to_string(entries) +
                            " entries exceeds budget of " +
                            std::to_string(budget().max_table_entries));
    }
}

}  // namespace siegel_lab
