#pragma once

#include <utility>
#include <vector>

#include "ghm/types.hpp"

namespace ghm {

/// Cyclic configuration u_t : X -> Z_n.
struct State
{
    std::vector<Phase> values;
    int n = 3;
    Tick tick = 0;

    State() = default;
    State(std::vector<Phase> v, int alphabet, Tick t = 0)
        : values(std::move(v)), n(alphabet), tick(t)
    {
    }

    static State zeros(std::size_t count, int alphabet)
    {
        return State(std::vector<Phase>(count, 0), alphabet);
    }

    std::size_t size() const { return values.size(); }
    Phase operator[](std::size_t i) const { return values[i]; }
    Phase& operator[](std::size_t i) { return values[i]; }

    friend bool operator==(const State&, const State&) = default;
};

/// Representative of (b - a) mod n in (-n/2, n/2].
inline int cyclic_offset(Phase a, Phase b, int n)
{
    int d = ((b - a) % n + n) % n;
    if (2 * d > n) d -= n;
    return d;
}

/// Throws InvalidArgument when n < 3 or a value lies outside [0, n).
void validate_state(const State& s, std::size_t expected_size);

}  // namespace ghm
