#include "infogaze/common.hpp"

#include <array>

namespace infogaze {

std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::all_zero: return "AllZero";
    case Errc::negative_value: return "NegativeValue";
    case Errc::non_finite: return "NonFinite";
    case Errc::negative_sigma: return "NegativeSigma";
    case Errc::empty_points: return "EmptyPoints";
    case Errc::zero_density_at_fixation: return "ZeroDensityAtFixation";
    case Errc::image_mismatch: return "ImageMismatch";
    case Errc::degenerate_bounds: return "DegenerateBounds";
    case Errc::single_image: return "SingleImage";
    case Errc::empty_grids: return "EmptyGrids";
    case Errc::too_few_subjects: return "TooFewSubjects";
    case Errc::missing_grid: return "MissingGrid";
    case Errc::constant_model: return "ConstantModel";
    case Errc::out_of_support: return "OutOfSupport";
    case Errc::bad_magic: return "BadMagic";
    case Errc::truncated_file: return "TruncatedFile";
    case Errc::version_unsupported: return "VersionUnsupported";
    case Errc::malformed_header: return "MalformedHeader";
    case Errc::malformed_row: return "MalformedRow";
    case Errc::validation_failed: return "ValidationFailed";
    case Errc::missing_artifact: return "MissingArtifact";
    case Errc::zero_prior: return "ZeroPrior";
    case Errc::support_violation: return "SupportViolation";
    case Errc::empty_list: return "EmptyList";
    case Errc::degenerate_anchors: return "DegenerateAnchors";
    case Errc::constant_vector: return "ConstantVector";
    case Errc::non_finite_objective: return "NonFinite";
    case Errc::missing_map: return "MissingMap";
    case Errc::io_error: return "IoError";
    case Errc::bad_config: return "BadConfig";
  }
  return "Unknown";
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace infogaze
