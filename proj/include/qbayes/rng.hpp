// Copyright 2026 The qbayes Authors
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

namespace qbayes {

/// Counter-based generator. A draw is a pure function of (seed, stream,
/// counter), so independent streams can be evaluated in any order and
/// replicas never share state.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    /// Generator for a child stream, decorrelated from this one.
    CounterRng split(std::uint64_t child) const;

    std::uint64_t bits(std::uint64_t counter) const;
    /// Uniform in [0, 1) with 53 random bits.
    double uniform(std::uint64_t counter) const;

    std::uint64_t next_bits() { return bits(counter_++); }
    double next_uniform() { return uniform(counter_++); }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace qbayes
