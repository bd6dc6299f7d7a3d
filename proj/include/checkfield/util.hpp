#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace checkfield {

// FNV-1a 64-bit. Not cryptographic; used only to key replay fixtures.
class Fnv1a64 {
public:
    void update(const void* data, std::size_t size) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state_ ^= bytes[i];
            state_ *= 0x100000001b3ull;
        }
    }
    void update(std::string_view text) { update(text.data(), text.size()); }

    uint64_t value() const { return state_; }
    std::string hex() const;

private:
    uint64_t state_ = 0xcbf29ce484222325ull;
};

std::string to_hex(uint64_t value);

std::string base64_encode(const std::vector<unsigned char>& bytes);

// Replaces ${VAR} with the environment value; unset variables become empty.
std::string interpolate_env(std::string_view text);

}  // namespace checkfield
