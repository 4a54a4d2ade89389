// fw: inspect, verify, patch and resign AFW1 update files, scan raw
// firmware blobs for their load address, and run the update-channel demo.

#include "fwkit/baseaddr.hpp"
#include "fwkit/checksum.hpp"
#include "fwkit/container.hpp"
#include "fwkit/demo.hpp"
#include "fwkit/fixture.hpp"
#include "fwkit/mac.hpp"
#include "fwkit/patch.hpp"
#include "fwkit/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

using namespace fwkit;
using json = nlohmann::ordered_json;

namespace {

// Exit code for unusable input (missing file, malformed container, bad key).
constexpr int kInputError = 3;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t parse_number(const std::string &s, std::uint64_t max, const char *what) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(s, &used, 0);
    } catch (const std::exception &) {
        used = 0;
    }
    if (used != s.size() || s.empty() || s[0] == '-' || v > max)
        throw InputError(std::string("bad ") + what + ": " + s);
    return v;
}

std::uint32_t parse_u32(const std::string &s, const char *what) {
    return static_cast<std::uint32_t>(parse_number(s, 0xFFFFFFFFu, what));
}

// Numbers accept decimal or 0x-prefixed hex.
CLI::Option *add_number(CLI::App *app, const std::string &flag, std::string &into, const std::string &help) {
    return app->add_option(flag, into, help)->type_name("NUM");
}

std::string read_text(const std::string &path) {
    const auto b = read_file(path);
    return std::string(b.begin(), b.end());
}

MacKey key_from_file(const std::string &path) { return parse_mac_key(read_text(path)); }

ImageSlot parse_slot(const std::string &s) { return s == "boot" ? ImageSlot::Boot : ImageSlot::App; }

void print_json(const json &j) { std::cout << j.dump(2) << "\n"; }

// ---------------------------------------------------------------- inspect

int cmd_inspect(const std::string &path, bool as_json) {
    const auto bytes = read_file(path);
    const auto parsed = parse_update_prefix(bytes);
    const auto &h = parsed.update.header;
    const auto stored = h.table_checksum;
    const auto computed = crc32(encode_table(h)).value;
    const bool trailer = has_mac_trailer(ByteView(bytes).subspan(parsed.container_size));
    const std::size_t trailing = bytes.size() - parsed.container_size;

    if (as_json) {
        json j;
        j["table_ver"] = h.table_ver;
        j["table_len"] = h.table_len;
        j["images"] = json::array();
        for (auto slot : {ImageSlot::App, ImageSlot::Boot}) {
            const auto &e = parsed.update.entry(slot);
            j["images"].push_back({{"slot", slot_name(slot)},
                                   {"identifier", e.identifier},
                                   {"reserved", e.reserved},
                                   {"offset", hex(e.offset)},
                                   {"length", e.length},
                                   {"checksum", hex(e.checksum)},
                                   {"checksum_ok", crc32(parsed.update.payload(slot)).value == e.checksum},
                                   {"version", hex(e.version)}});
        }
        j["table_checksum"] = hex(stored);
        j["table_checksum_ok"] = stored == computed;
        j["container_size"] = parsed.container_size;
        j["trailing_bytes"] = trailing;
        j["mac_trailer"] = trailer;
        print_json(j);
        return 0;
    }

    std::printf("table_ver       %u\n", h.table_ver);
    std::printf("table_len       %u\n", h.table_len);
    std::printf("slot  id      reserved  offset      length      checksum    version\n");
    for (auto slot : {ImageSlot::App, ImageSlot::Boot}) {
        const auto &e = parsed.update.entry(slot);
        const bool ok = crc32(parsed.update.payload(slot)).value == e.checksum;
        std::printf("%-4s  0x%04x  0x%04x    0x%08x  0x%08x  0x%08x  0x%08x%s\n", slot_name(slot), e.identifier,
                    e.reserved, e.offset, e.length, e.checksum, e.version, ok ? "" : "  (stale)");
    }
    std::printf("table_checksum  0x%08x%s\n", stored, stored == computed ? "" : "  (stale)");
    std::printf("container_size  %zu\n", parsed.container_size);
    if (trailing)
        std::printf("trailing        %zu bytes%s\n", trailing, trailer ? " (MAC1 trailer)" : "");
    return 0;
}

// ----------------------------------------------------------------- verify

int cmd_verify(const std::string &path, const std::string &key_path, bool as_json) {
    const auto bytes = read_file(path);
    const auto policy =
        key_path.empty() ? VerifyPolicy::checksum_only() : VerifyPolicy::checksum_and_mac(key_from_file(key_path));
    const auto r = verify(bytes, policy);
    if (as_json) {
        json j;
        j["verdict"] = r.accepted() ? "ACCEPT" : "REJECT";
        j["policy"] = key_path.empty() ? "ChecksumOnly" : "ChecksumAndMac";
        if (r.accepted()) {
            j["app"] = hex(r.versions()->app);
            j["boot"] = hex(r.versions()->boot);
        } else {
            j["cause"] = to_string(r.cause());
        }
        print_json(j);
    } else {
        std::printf("%s\n", r.summary().c_str());
    }
    return r.accepted() ? 0 : 1;
}

// ------------------------------------------------------------ patch/resign

// A patched container can no longer carry a valid MAC, so any trailer is
// dropped along with other trailing bytes.
FirmwareUpdate load_update(const std::string &path) {
    const auto bytes = read_file(path);
    return parse_update_prefix(bytes).update;
}

int cmd_patch(const std::string &path, const std::string &image, const std::string &version,
              const std::vector<std::string> &write, const std::string &out) {
    auto u = load_update(path);
    const auto slot = parse_slot(image);
    if (!version.empty())
        u = set_version(std::move(u), slot, parse_u32(version, "version"));
    if (!write.empty()) {
        const auto at = parse_number(write[0], SIZE_MAX, "offset");
        u = patch_bytes(std::move(u), slot, static_cast<std::size_t>(at), from_hex(write[1]));
    }
    write_file(out.empty() ? path : out, serialize_update(u));
    return 0;
}

int cmd_resign(const std::string &path, const std::string &out) {
    const auto u = resign(load_update(path));
    write_file(out, serialize_update(u));
    const auto &h = u.header;
    std::printf("app=0x%08x boot=0x%08x table=0x%08x\n", h.images[0].checksum, h.images[1].checksum,
                h.table_checksum);
    return 0;
}

// --------------------------------------------------------------- baseaddr

int cmd_strings(const std::string &path, std::size_t min_len) {
    const auto blob = read_file(path);
    for (const auto &s : detect_strings(blob, min_len)) {
        const std::string text(blob.begin() + static_cast<std::ptrdiff_t>(s.offset),
                               blob.begin() + static_cast<std::ptrdiff_t>(s.offset + s.length));
        std::printf("0x%08zx  %s\n", s.offset, text.c_str());
    }
    return 0;
}

int cmd_scan_base(const std::string &path, const BaseRange &range, std::size_t top, std::size_t min_len,
                  bool serial, bool as_json) {
    const auto blob = read_file(path);
    const auto cands = estimate_base(blob, range, min_len, serial ? Backend::Serial : Backend::Parallel);
    const std::size_t n = std::min(top, cands.size());
    if (as_json) {
        json j = json::array();
        for (std::size_t i = 0; i < n; ++i)
            j.push_back({{"rank", cands[i].rank}, {"base", hex(cands[i].base)}, {"score", cands[i].score}});
        print_json(j);
        return 0;
    }
    for (std::size_t i = 0; i < n; ++i)
        std::printf("0x%08x  score=%llu\n", cands[i].base, static_cast<unsigned long long>(cands[i].score));
    return 0;
}

int cmd_vote_base(const std::string &path, std::uint64_t min_votes, std::size_t min_len, bool serial) {
    const auto blob = read_file(path);
    const auto v = vote_base(blob, min_len, min_votes, serial ? Backend::Serial : Backend::Parallel);
    if (!v) {
        std::fprintf(stderr, "no base reached %llu votes\n", static_cast<unsigned long long>(min_votes));
        return 1;
    }
    std::printf("0x%08x  score=%llu\n", v->base, static_cast<unsigned long long>(v->votes));
    return 0;
}

// -------------------------------------------------------------------- mac

int cmd_mac_attach(const std::string &path, const std::string &key_path, const std::string &out) {
    const auto bytes = read_file(path);
    write_file(out, attach_mac(bytes, key_from_file(key_path)));
    return 0;
}

int cmd_mac_verify(const std::string &path, const std::string &key_path) {
    const auto status = verify_mac(read_file(path), key_from_file(key_path));
    std::printf("%s\n", to_string(status));
    switch (status) {
    case MacStatus::Valid:
        return 0;
    case MacStatus::Missing:
        return 1;
    case MacStatus::Mismatch:
        return 2;
    }
    return 2;
}

// ------------------------------------------------------------------- demo

int cmd_demo(const DemoOptions &opts) {
    const auto r = run_attack_demo(opts);
    for (const auto &line : r.transcript)
        std::printf("%s\n", line.c_str());
    std::printf("outcome: %s, tracker app=0x%08x boot=0x%08x\n", channel::to_string(r.sync.outcome),
                r.tracker.installed.app, r.tracker.installed.boot);
    std::printf("%s\n", r.expected_outcome ? "EXPECTED" : "UNEXPECTED");
    return r.expected_outcome ? 0 : 1;
}

// ------------------------------------------------------------ gen-fixture

json truth_json(const FixtureTruth &t) {
    json j;
    j["base"] = hex(t.base);
    j["stripped"] = t.stripped;
    j["strings"] = json::array();
    for (const auto &s : t.strings)
        j["strings"].push_back({{"offset", hex(s.offset)}, {"text", s.text}});
    j["ref_offsets"] = json::array();
    for (auto off : t.ref_offsets)
        j["ref_offsets"].push_back(hex(off));
    return j;
}

void write_text(const std::string &path, const std::string &text) { write_file(path, as_bytes(text)); }

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"AFW1 firmware update toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string file, out, key, image = "app", version;
    bool as_json = false, serial = false;

    auto *inspect = app.add_subcommand("inspect", "Print the header table of an AFW1 file");
    inspect->add_option("file", file)->required();
    inspect->add_flag("--json", as_json, "Machine-readable output");

    auto *crc = app.add_subcommand("crc", "CRC-32 of a file");
    crc->add_option("file", file)->required();

    auto *ver = app.add_subcommand("verify", "Verify an AFW1 file (exit 0 accept, 1 reject)");
    ver->add_option("file", file)->required();
    ver->add_option("--mac-key", key, "Hex key file; also require a valid MAC trailer");
    ver->add_flag("--json", as_json, "Machine-readable output");

    std::vector<std::string> write;
    auto *patch = app.add_subcommand("patch", "Edit a version field or payload bytes (checksums left stale)");
    patch->add_option("file", file)->required();
    patch->add_option("--image", image, "Image to edit")->check(CLI::IsMember({"app", "boot"}));
    auto *set_ver = add_number(patch, "--set-version", version, "New version (u32)");
    auto *wr = patch->add_option("--write", write, "Overwrite payload bytes at OFFSET")
                   ->expected(2)
                   ->type_name("OFFSET HEXBYTES");
    patch->add_option("-o,--output", out, "Output file (default: edit in place)");

    auto *rs = app.add_subcommand("resign", "Recompute image and table checksums");
    rs->add_option("file", file)->required();
    rs->add_option("-o,--output", out, "Output file")->required();

    std::size_t min_len = kDefaultMinStringLength;
    auto *strs = app.add_subcommand("strings", "List NUL-terminated printable strings in a raw blob");
    strs->add_option("blob", file)->required();
    strs->add_option("--min-len", min_len, "Minimum string length")->check(CLI::PositiveNumber);

    std::string start = "0x0", end = "0x80000", stride = "0x1000";
    std::size_t top = 10;
    auto *scan = app.add_subcommand("scan-base", "Rank candidate load addresses by string-reference hits");
    scan->add_option("blob", file)->required();
    add_number(scan, "--start", start, "First candidate base")->capture_default_str();
    add_number(scan, "--end", end, "End of the candidate range (exclusive)")->capture_default_str();
    add_number(scan, "--stride", stride, "Candidate spacing")->capture_default_str();
    scan->add_option("--top", top, "Candidates to print")->capture_default_str();
    scan->add_option("--min-len", min_len, "Minimum string length")->check(CLI::PositiveNumber);
    scan->add_flag("--serial", serial, "Use the serial reference kernel");
    scan->add_flag("--json", as_json, "Machine-readable output");

    std::uint64_t min_votes = 10;
    auto *vote = app.add_subcommand("vote-base", "Modal base over all word/string pairs (any alignment)");
    vote->add_option("blob", file)->required();
    vote->add_option("--min-votes", min_votes, "Votes the winner needs")->capture_default_str();
    vote->add_option("--min-len", min_len, "Minimum string length")->check(CLI::PositiveNumber);
    vote->add_flag("--serial", serial, "Use the serial reference kernel");

    auto *mac = app.add_subcommand("mac", "HMAC-SHA-256 trailer");
    mac->require_subcommand(1);
    auto *attach = mac->add_subcommand("attach", "Append a MAC1 trailer");
    attach->add_option("file", file)->required();
    attach->add_option("--key", key, "Hex key file (32 bytes)")->required();
    attach->add_option("-o,--output", out, "Output file")->required();
    auto *mverify = mac->add_subcommand("verify", "Check the trailer (exit 0 valid, 1 missing, 2 mismatch)");
    mverify->add_option("file", file)->required();
    mverify->add_option("--key", key, "Hex key file (32 bytes)")->required();

    DemoOptions demo_opts;
    std::string countermeasure;
    auto *demo = app.add_subcommand("demo", "Scenarios over loopback");
    demo->require_subcommand(1);
    auto *attack = demo->add_subcommand("attack", "On-path firmware substitution (exit 0 iff expected outcome)");
    attack->add_option("--countermeasure", countermeasure, "Tracker-side countermeasure")
        ->check(CLI::IsMember({"mac"}));
    attack->add_flag("--fake-availability", demo_opts.fake_availability,
                     "Vendor has no update; the adversary fabricates the manifest");
    attack->add_option("--seed", demo_opts.seed, "RNG seed")->capture_default_str();

    FixtureSpec fspec;
    std::string fbase = "0x18000", fsize = "0x8000", truth_path;
    auto *gen = app.add_subcommand("gen-fixture", "Synthetic firmware for tests and demos");
    gen->require_subcommand(1);
    auto *gblob = gen->add_subcommand("blob", "Raw blob with planted strings and references");
    gblob->add_option("--seed", fspec.seed, "RNG seed")->capture_default_str();
    gblob->add_option("--strings", fspec.n_strings, "Planted strings")->capture_default_str();
    gblob->add_option("--refs", fspec.n_refs, "Planted references")->capture_default_str();
    add_number(gblob, "--base", fbase, "Load address the references assume")->capture_default_str();
    add_number(gblob, "--size", fsize, "Blob size in bytes")->capture_default_str();
    gblob->add_flag("--strip-strings", fspec.strip_strings, "Overwrite the strings after placing references");
    gblob->add_option("-o,--output", out, "Output file")->required();
    gblob->add_option("--truth", truth_path, "Write the ground-truth record as JSON");

    UpdateFixtureSpec uspec;
    std::string app_version = "1", boot_version = "1";
    auto *gafw = gen->add_subcommand("afw", "Valid AFW1 file with synthetic app and boot payloads");
    gafw->add_option("--seed", uspec.seed, "RNG seed")->capture_default_str();
    add_number(gafw, "--app-version", app_version, "App image version")->capture_default_str();
    add_number(gafw, "--boot-version", boot_version, "Boot image version")->capture_default_str();
    gafw->add_option("-o,--output", out, "Output file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*inspect)
            return cmd_inspect(file, as_json);
        if (*crc) {
            std::printf("%s\n", hex(crc32(read_file(file)).value).c_str());
            return 0;
        }
        if (*ver)
            return cmd_verify(file, key, as_json);
        if (*patch) {
            if (!*set_ver && !*wr)
                throw InputError("patch needs --set-version or --write");
            return cmd_patch(file, image, version, write, out);
        }
        if (*rs)
            return cmd_resign(file, out);
        if (*strs)
            return cmd_strings(file, min_len);
        if (*scan) {
            const BaseRange range{parse_number(start, 0xFFFFFFFFu, "start"),
                                  parse_number(end, std::uint64_t{1} << 32, "end"),
                                  parse_number(stride, 0xFFFFFFFFu, "stride")};
            return cmd_scan_base(file, range, top, min_len, serial, as_json);
        }
        if (*vote)
            return cmd_vote_base(file, min_votes, min_len, serial);
        if (*attach)
            return cmd_mac_attach(file, key, out);
        if (*mverify)
            return cmd_mac_verify(file, key);
        if (*attack) {
            demo_opts.countermeasure_mac = countermeasure == "mac";
            return cmd_demo(demo_opts);
        }
        if (*gblob) {
            fspec.base = parse_u32(fbase, "base");
            fspec.payload_size = static_cast<std::size_t>(parse_number(fsize, 1u << 30, "size"));
            const auto fx = gen_fixture(fspec);
            write_file(out, fx.blob);
            if (!truth_path.empty())
                write_text(truth_path, truth_json(fx.truth).dump(2) + "\n");
            return 0;
        }
        if (*gafw) {
            uspec.app_version = parse_u32(app_version, "app version");
            uspec.boot_version = parse_u32(boot_version, "boot version");
            const auto u = gen_update_fixture(uspec);
            write_file(out, serialize_update(u));
            return 0;
        }
    } catch (const std::exception &e) {
        std::fprintf(stderr, "fw: %s\n", e.what());
        return kInputError;
    }
    return kInputError;
}
