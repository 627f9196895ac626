#include "tumorsynth/error.hpp"

namespace tumorsynth {

const char* errc_name(errc code) {
    switch (code) {
        case errc::malformed_header: return "MalformedHeader";
        case errc::dimension_mismatch: return "DimensionMismatch";
        case errc::unsupported_datatype: return "UnsupportedDatatype";
        case errc::io_failure: return "IoFailure";
        case errc::non_binary_mask: return "NonBinaryMask";
        case errc::inconsistent_masks: return "InconsistentMasks";
        case errc::empty_organ: return "EmptyOrgan";
        case errc::seed_outside_organ: return "SeedOutsideOrgan";
        case errc::no_eligible_seed: return "NoEligibleSeed";
        case errc::empty_tumor: return "EmptyTumor";
        case errc::degenerate_shape: return "DegenerateShape";
        case errc::placement_failed: return "PlacementFailed";
        case errc::empty_mask: return "EmptyMask";
        case errc::empty_input: return "EmptyInput";
        case errc::manifest_row_invalid: return "ManifestRowInvalid";
        case errc::invalid_config: return "InvalidConfig";
    }
    return "UnknownError";
}

error::error(errc code, const std::string& msg)
    : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code), message_(msg) {}

void fail(errc code, const std::string& msg) {
    throw error(code, msg);
}

} // namespace tumorsynth
