#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace roughkit {

inline constexpr const char* kVersion = "0.1.0";

// caller passed something structurally wrong (bad grid, mismatched dims, ...)
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// a computation produced garbage (blow-up, non-convergence, non-finite state)
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// a study-level gate failed (too many aborted replicas, trend assertion, ...)
struct StudyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// (seed, stream) fully determines every number a sampler produces.
// Monte-Carlo replicas get stream = replica index.
struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

// xoshiro256++ seeded through splitmix64; normals via Box-Muller.
// Self-contained so output is identical across platforms and library versions.
class Rng {
public:
    explicit Rng(RngSpec spec);

    std::uint64_t next_u64();
    double uniform();  // (0, 1]
    double normal();   // N(0, 1)

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace roughkit
