#pragma once

#include <stdexcept>
#include <string>

namespace tumorsynth {

enum class errc {
    malformed_header,
    dimension_mismatch,
    unsupported_datatype,
    io_failure,
    non_binary_mask,
    inconsistent_masks,
    empty_organ,
    seed_outside_organ,
    no_eligible_seed,
    empty_tumor,
    degenerate_shape,
    placement_failed,
    empty_mask,
    empty_input,
    manifest_row_invalid,
    invalid_config,
};

const char* errc_name(errc code);

/// Exception carrying a machine-checkable error code plus a human message.
/// what() reads "CodeName: message"; message() is the bare text, handy when
/// rethrowing with added context.
class error : public std::runtime_error {
  public:
    error(errc code, const std::string& msg);
    errc code() const noexcept { return code_; }
    const std::string& message() const noexcept { return message_; }

  private:
    errc code_;
    std::string message_;
};

[[noreturn]] void fail(errc code, const std::string& msg);

} // namespace tumorsynth
