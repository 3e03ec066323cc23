/*
   Copyright 2026 The degsde Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace degsde {

/// Identifies one reproducible random stream: a master seed shared by an
/// experiment and the index of the path within it.
struct SeedId {
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;

    friend bool operator==(const SeedId&, const SeedId&) = default;
};

/// Independent sub-streams of one path. The driving lane carries the
/// Brownian increments; the others feed step refinement and the Bernoulli
/// draws of the bridge hit test.
enum class Lane : std::uint32_t { driving = 0, refine = 1, bridge = 2, aux = 3 };

/// Philox-4x32-10 counter-based generator. Stateless: block(i) is a pure
/// function of (seed, lane, i).
class CounterRng {
public:
    using Block = std::array<std::uint32_t, 4>;

    CounterRng(SeedId seed, Lane lane) noexcept;

    Block block(std::uint64_t index) const noexcept;

private:
    std::array<std::uint32_t, 2> key_{};
    std::uint32_t lane_bits_ = 0;
    std::uint32_t path_lo_ = 0;
    std::uint32_t path_hi_ = 0;
};

/// Standard normal variates. Variate k is fixed by (seed, lane, k), so the
/// sequence can be resumed or addressed at random.
class NormalStream {
public:
    NormalStream(SeedId seed, Lane lane = Lane::driving) noexcept : rng_(seed, lane) {}

    double operator()() noexcept;
    double at(std::uint64_t k) const noexcept;
    void seek(std::uint64_t k) noexcept;
    std::uint64_t position() const noexcept { return next_; }

private:
    std::pair<double, double> pair_at(std::uint64_t block) const noexcept;

    CounterRng rng_;
    std::uint64_t next_ = 0;
    std::uint64_t cached_block_ = ~std::uint64_t{0};
    std::pair<double, double> cached_{};
};

/// Uniform variates on the open interval (0, 1).
class UniformStream {
public:
    UniformStream(SeedId seed, Lane lane = Lane::bridge) noexcept : rng_(seed, lane) {}

    double operator()() noexcept;
    double at(std::uint64_t k) const noexcept;

private:
    CounterRng rng_;
    std::uint64_t next_ = 0;
};

/// Discretized Brownian driving path: `increments[k]` is W(t_{k+1}) - W(t_k)
/// on the uniform grid t_k = k * dt.
struct BrownianPath {
    double dt = 0.0;
    std::vector<double> increments;
    double w0 = 0.0;
    SeedId seed;

    std::size_t steps() const noexcept { return increments.size(); }
    double horizon() const noexcept { return dt * static_cast<double>(increments.size()); }
    /// Cumulative values W(t_0), ..., W(t_n); size steps() + 1.
    std::vector<double> values() const;
    /// Appends `more` increments continuing the same stream.
    void extend(std::size_t more);
};

BrownianPath gen_path(SeedId seed, std::size_t n, double dt, double w0 = 0.0);

/// Sums consecutive blocks of `factor` fine increments. The fine length must
/// be a multiple of `factor`.
std::vector<double> coarsen(std::span<const double> fine, std::size_t factor);

/// Probability that a Brownian bridge with variance rate sigma^2 from
/// `w_left` to `w_right` over `dt` touches `level`.
double bridge_crossing_prob(double w_left, double w_right, double dt, double level,
                            double sigma = 1.0);

/// Splits an increment `dw` over a step of length `h` into two half-step
/// increments via the Brownian bridge midpoint, using the standard normal `z`.
std::pair<double, double> bridge_split(double h, double dw, double z) noexcept;

} // namespace degsde
