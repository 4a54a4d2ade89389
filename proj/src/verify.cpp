#include "fwkit/verify.hpp"

#include "fwkit/checksum.hpp"
#include "fwkit/container.hpp"

namespace fwkit {

const char *to_string(RejectCause c) {
    switch (c) {
    case RejectCause::None:
        return "None";
    case RejectCause::BadTableVersion:
        return "BadTableVersion";
    case RejectCause::BadTableLength:
        return "BadTableLength";
    case RejectCause::TableChecksumMismatch:
        return "TableChecksumMismatch";
    case RejectCause::AppImageChecksumMismatch:
        return "ImageChecksumMismatch(app)";
    case RejectCause::BootImageChecksumMismatch:
        return "ImageChecksumMismatch(boot)";
    case RejectCause::BoundsError:
        return "BoundsError";
    case RejectCause::MacMissing:
        return "MacMissing";
    case RejectCause::MacMismatch:
        return "MacMismatch";
    case RejectCause::BadIdentifier:
        return "BadIdentifier";
    }
    return "?";
}

const char *to_string(Verdict v) { return v == Verdict::Accept ? "ACCEPT" : "REJECT"; }

std::string VerificationReport::summary() const {
    if (accepted())
        return "ACCEPT app=" + hex(versions_->app) + " boot=" + hex(versions_->boot);
    return std::string("REJECT ") + to_string(cause_);
}

namespace {

RejectCause cause_for(FormatErrc e) {
    switch (e) {
    case FormatErrc::BadTableVersion:
        return RejectCause::BadTableVersion;
    case FormatErrc::BadTableLength:
        return RejectCause::BadTableLength;
    case FormatErrc::DuplicateIdentifier:
    case FormatErrc::UnknownIdentifier:
    case FormatErrc::WrongImageOrder:
        return RejectCause::BadIdentifier;
    default:
        return RejectCause::BoundsError;
    }
}

} // namespace

VerificationReport verify(ByteView bytes, const VerifyPolicy &policy) {
    ParsedPrefix parsed;
    try {
        parsed = parse_update_prefix(bytes);
    } catch (const FormatError &e) {
        return VerificationReport::reject(cause_for(e.code()));
    }
    const UpdateHeader &h = parsed.update.header;

    if (crc32(bytes.first(h.table_len)).value != h.table_checksum)
        return VerificationReport::reject(RejectCause::TableChecksumMismatch);
    if (crc32(parsed.update.app_payload).value != h.images[0].checksum)
        return VerificationReport::reject(RejectCause::AppImageChecksumMismatch);
    if (crc32(parsed.update.boot_payload).value != h.images[1].checksum)
        return VerificationReport::reject(RejectCause::BootImageChecksumMismatch);

    if (policy.mode() == VerifyMode::ChecksumAndMac) {
        switch (verify_mac(bytes, *policy.mac_key())) {
        case MacStatus::Missing:
            return VerificationReport::reject(RejectCause::MacMissing);
        case MacStatus::Mismatch:
            return VerificationReport::reject(RejectCause::MacMismatch);
        case MacStatus::Valid:
            break;
        }
    }
    return VerificationReport::accept({h.images[0].version, h.images[1].version});
}

} // namespace fwkit
