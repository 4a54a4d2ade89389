#pragma once

// Adversary-side edits. None of these touch checksums except resign();
// a patched update is deliberately stale until it is resigned.

#include "fwkit/container.hpp"

#include <stdexcept>

namespace fwkit {

class PatchError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

FirmwareUpdate set_version(FirmwareUpdate u, ImageSlot which, std::uint32_t version);

/// In-place overwrite of payload bytes [at, at + bytes.size()). The
/// payload never grows; throws PatchError (OutOfRange) otherwise.
FirmwareUpdate patch_bytes(FirmwareUpdate u, ImageSlot which, std::size_t at, ByteView bytes);

/// Recomputes both image checksums and then the table checksum. Payloads
/// and versions are left alone.
FirmwareUpdate resign(FirmwareUpdate u);

} // namespace fwkit
