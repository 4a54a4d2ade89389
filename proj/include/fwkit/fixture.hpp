#pragma once

// Synthetic firmware blobs with known ground truth: random filler, planted
// NUL-terminated debug strings, and word-aligned absolute references to
// those strings computed for a chosen load address.

#include "fwkit/bytes.hpp"
#include "fwkit/container.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fwkit {

struct FixtureSpec {
    std::uint64_t seed = 1;
    std::size_t n_strings = 40;
    std::size_t n_refs = 60;
    std::uint32_t base = 0x18000;
    std::size_t payload_size = 0x8000;
    std::size_t min_string_len = 8;
    std::size_t max_string_len = 24;
    /// Overwrite planted strings with non-printable noise after placing
    /// the references, as a release build with debug strings removed.
    bool strip_strings = false;
};

struct PlantedString {
    std::size_t offset = 0;
    std::string text;
};

struct FixtureTruth {
    std::uint32_t base = 0;
    std::vector<PlantedString> strings; ///< offset order
    std::vector<std::size_t> ref_offsets; ///< ascending
    bool stripped = false;
};

struct Fixture {
    Bytes blob;
    FixtureTruth truth;
};

class FixtureError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Deterministic for a given spec. Throws FixtureError ("DoesNotFit")
/// when the strings and references cannot be placed.
Fixture gen_fixture(const FixtureSpec &spec);

struct UpdateFixtureSpec {
    std::uint64_t seed = 1;
    FixtureSpec app{.n_strings = 40, .n_refs = 60, .base = 0x18000, .payload_size = 0x8000};
    FixtureSpec boot{.n_strings = 30, .n_refs = 40, .base = 0x3AC00, .payload_size = 0x3000};
    std::uint32_t app_version = 1;
    std::uint32_t boot_version = 1;
};

/// A consistent AFW1 update whose two payloads are synthetic blobs. The
/// per-image seeds are derived from `spec.seed`.
FirmwareUpdate gen_update_fixture(const UpdateFixtureSpec &spec);

} // namespace fwkit
