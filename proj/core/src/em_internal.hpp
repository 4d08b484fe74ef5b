#pragma once

// Shared E/M-step plumbing used by the base, censored, and mixture fits.
// Not installed; include only from core sources.

#include <cstdint>
#include <vector>

#include "bundlesight/em.hpp"
#include "bundlesight/polyhedron.hpp"
#include "bundlesight/sampler.hpp"

namespace bundlesight {
namespace detail {

// Batch of `count` draws from `current` truncated to poly: filled from the
// shared pool when it holds enough members (scan starts at a per-(iteration,
// index, component) offset), otherwise via importance sampling from a
// proposal centered at the region's interior point with the current
// covariance. `component` keeps mixture streams disjoint; the base fit uses
// component 0. Sets *used_fallback when given.
SampleBatch sample_region_batch(const SharedPool& pool, const Polyhedron& poly,
                                const GaussianParams& current,
                                const EmConfig& config, int iteration,
                                std::uint64_t index, int component, int count,
                                bool* used_fallback);

// Weighted Gaussian moments across batches. Batch b contributes with total
// mass masses[b] (its internal weights sum to one). The mean uses the pooled
// first moment; the covariance is the pooled scatter about that mean, with
// the jitter floor applied. masses empty means unit mass per batch.
GaussianParams weighted_m_step(const std::vector<SampleBatch>& batches,
                               const std::vector<double>& masses);

}  // namespace detail
}  // namespace bundlesight
