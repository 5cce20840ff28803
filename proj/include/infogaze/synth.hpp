#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "infogaze/density.hpp"
#include "infogaze/temporal.hpp"
#include "infogaze/types.hpp"

namespace infogaze {

// i.i.d. pixel draws from the pmf with uniform jitter inside the pixel;
// t = fixation index * 0.25 s. One generator per train, derived from the
// master seed by train index (mt19937_64).
std::vector<FixationTrain> sample_spatial(const ImageFrame& frame, const DensityGrid& pmf,
                                          int n_subjects, int fixations_per_subject,
                                          std::uint64_t seed);

// First fixation from base, each subsequent one from the conditional
// density given the previous fixation. With delta = 0 this consumes the
// random stream exactly like sample_spatial's first train.
FixationTrain sample_temporal(const ImageFrame& frame, const DensityGrid& base,
                              const TemporalParams& p, int train_length,
                              std::uint64_t seed);

}  // namespace infogaze
