#include "fwkit/fixture.hpp"

#include "fwkit/baseaddr.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <unordered_set>

namespace fwkit {

namespace {

// Spurious strings of this length or more are scrubbed from the filler, so
// detect_strings at any min_len >= 4 sees exactly the planted set.
constexpr std::size_t kScrubLength = 4;
constexpr int kPlacementTries = 1000;

enum : std::uint8_t { kFree = 0, kUsed = 1 };

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    // mt19937_64 output is fully specified, so fixtures match across
    // standard libraries (unlike std::uniform_int_distribution).
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : gen_() % n; }
    std::uint8_t byte() { return static_cast<std::uint8_t>(gen_()); }

  private:
    std::mt19937_64 gen_;
};

std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

bool span_free(const std::vector<std::uint8_t> &used, std::size_t at, std::size_t len) {
    if (at + len > used.size())
        return false;
    return std::all_of(used.begin() + static_cast<std::ptrdiff_t>(at),
                       used.begin() + static_cast<std::ptrdiff_t>(at + len), [](auto u) { return u == kFree; });
}

// Finds `len` free bytes at a position that is a multiple of `align`:
// random probes first, then a wrapping linear scan from a random start.
std::optional<std::size_t> find_slot(Rng &rng, const std::vector<std::uint8_t> &used, std::size_t len,
                                     std::size_t align) {
    if (len > used.size())
        return std::nullopt;
    const std::size_t slots = (used.size() - len) / align + 1;
    for (int t = 0; t < kPlacementTries; ++t) {
        const std::size_t at = rng.below(slots) * align;
        if (span_free(used, at, len))
            return at;
    }
    const std::size_t first = rng.below(slots);
    for (std::size_t k = 0; k < slots; ++k) {
        const std::size_t at = ((first + k) % slots) * align;
        if (span_free(used, at, len))
            return at;
    }
    return std::nullopt;
}

void scrub_spurious(Bytes &blob, const std::vector<std::uint8_t> &used, const std::vector<PlantedString> &planted) {
    std::unordered_set<std::size_t> planted_at;
    for (const auto &p : planted)
        planted_at.insert(p.offset);

    for (;;) {
        bool changed = false;
        for (const auto &s : detect_strings(blob, kScrubLength)) {
            if (planted_at.contains(s.offset))
                continue;
            std::size_t k = s.offset + s.length;
            while (k > s.offset && used[k - 1] != kFree)
                --k;
            if (k == s.offset)
                throw FixtureError("DoesNotFit: reference words form a printable run at " + hex(s.offset));
            blob[k - 1] = 0x01;
            changed = true;
        }
        if (!changed)
            return;
    }
}

} // namespace

Fixture gen_fixture(const FixtureSpec &spec) {
    if (spec.n_refs > 0 && spec.n_strings == 0)
        throw FixtureError("DoesNotFit: references need at least one string");
    if (spec.min_string_len == 0 || spec.min_string_len > spec.max_string_len)
        throw FixtureError("DoesNotFit: bad string length bounds");
    if (std::uint64_t{spec.base} + spec.payload_size > (std::uint64_t{1} << 32))
        throw FixtureError("DoesNotFit: base + payload exceeds 32-bit address space");
    const std::uint64_t worst = spec.n_strings * (spec.max_string_len + 2) + spec.n_refs * 4;
    if (worst > spec.payload_size)
        throw FixtureError("DoesNotFit: " + std::to_string(worst) + " bytes of planted data in a " +
                           std::to_string(spec.payload_size) + "-byte payload");

    static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789_:% ";
    Rng rng(spec.seed);

    Fixture fx;
    fx.truth.base = spec.base;
    fx.blob.resize(spec.payload_size);
    for (auto &b : fx.blob)
        b = rng.byte();
    std::vector<std::uint8_t> used(spec.payload_size, kFree);

    for (std::size_t i = 0; i < spec.n_strings; ++i) {
        const std::size_t len = spec.min_string_len + rng.below(spec.max_string_len - spec.min_string_len + 1);
        // NUL, text, NUL: the leading NUL keeps the run maximal.
        const auto slot = find_slot(rng, used, len + 2, 1);
        if (!slot)
            throw FixtureError("DoesNotFit: no room for string " + std::to_string(i));
        PlantedString ps{*slot + 1, {}};
        for (std::size_t k = 0; k < len; ++k)
            ps.text.push_back(kAlphabet[rng.below(sizeof kAlphabet - 1)]);
        fx.blob[*slot] = 0;
        std::copy(ps.text.begin(), ps.text.end(), fx.blob.begin() + static_cast<std::ptrdiff_t>(ps.offset));
        fx.blob[ps.offset + len] = 0;
        std::fill_n(used.begin() + static_cast<std::ptrdiff_t>(*slot), len + 2, kUsed);
        fx.truth.strings.push_back(std::move(ps));
    }
    std::sort(fx.truth.strings.begin(), fx.truth.strings.end(),
              [](const auto &a, const auto &b) { return a.offset < b.offset; });

    for (std::size_t i = 0; i < spec.n_refs; ++i) {
        const auto slot = find_slot(rng, used, 4, 4);
        if (!slot)
            throw FixtureError("DoesNotFit: no room for reference " + std::to_string(i));
        const auto &target = fx.truth.strings[rng.below(fx.truth.strings.size())];
        store_le32(fx.blob, *slot, static_cast<std::uint32_t>(spec.base + target.offset));
        std::fill_n(used.begin() + static_cast<std::ptrdiff_t>(*slot), 4, kUsed);
        fx.truth.ref_offsets.push_back(*slot);
    }
    std::sort(fx.truth.ref_offsets.begin(), fx.truth.ref_offsets.end());

    scrub_spurious(fx.blob, used, fx.truth.strings);

    if (spec.strip_strings) {
        for (const auto &s : fx.truth.strings)
            for (std::size_t k = 0; k < s.text.size(); ++k)
                fx.blob[s.offset + k] = static_cast<std::uint8_t>(0x80 | rng.byte());
        fx.truth.stripped = true;
    }
    return fx;
}

FirmwareUpdate gen_update_fixture(const UpdateFixtureSpec &spec) {
    FixtureSpec app = spec.app;
    FixtureSpec boot = spec.boot;
    app.seed = mix(spec.seed);
    boot.seed = mix(spec.seed ^ 0xB007B007ull);
    const auto a = gen_fixture(app);
    const auto b = gen_fixture(boot);
    return build_update(a.blob, b.blob, spec.app_version, spec.boot_version);
}

} // namespace fwkit
