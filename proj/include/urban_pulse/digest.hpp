#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>

namespace urban_pulse {

/// 64-bit FNV-1a. Used for config and dataset fingerprints (not for security).
class Fnv1a {
public:
    void update(std::span<const std::byte> bytes) noexcept {
        for (std::byte b : bytes) {
            state_ ^= static_cast<std::uint64_t>(b);
            state_ *= kPrime;
        }
    }
    void update(std::string_view text) noexcept {
        update(std::as_bytes(std::span{text.data(), text.size()}));
    }
    void update(std::uint64_t value) noexcept {
        for (int i = 0; i < 8; ++i) {
            state_ ^= (value >> (8 * i)) & 0xffu;
            state_ *= kPrime;
        }
    }
    [[nodiscard]] std::uint64_t value() const noexcept { return state_; }

private:
    static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ull;
    static constexpr std::uint64_t kPrime = 0x100000001b3ull;
    std::uint64_t state_ = kOffset;
};

inline std::uint64_t fnv1a(std::string_view text) noexcept {
    Fnv1a h;
    h.update(text);
    return h.value();
}

inline std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

} // namespace urban_pulse
