// Copyright 2026 The Servoland Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace servoland {

/// Portable random stream. The engine is std::mt19937_64 (bit-exact by the
/// standard); the distributions are implemented here because the standard
/// library ones are implementation-defined.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    /// Seed for an independent sub-stream of `seed` (splitmix64 mixing).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream_id);

    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal (Box-Muller, one draw per call).
    double normal();
    double normal(double mean, double sigma) { return mean + sigma * normal(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace servoland
