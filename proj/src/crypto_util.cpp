/*
 * Copyright 2026 The fedauth Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fedauth/crypto_util.hpp"

#include <array>
#include <memory>
#include <random>

#include <openssl/crypto.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

namespace fedauth {

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

constexpr char kHexDigits[] = "0123456789abcdef";

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '-') return 62;
    if (c == '_') return 63;
    return -1;
}

}  // namespace

std::string base64url_encode(std::string_view input) {
    std::string out;
    out.reserve((input.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 3 <= input.size()) {
        uint32_t n = (static_cast<uint8_t>(input[i]) << 16) |
                     (static_cast<uint8_t>(input[i + 1]) << 8) |
                     static_cast<uint8_t>(input[i + 2]);
        out.push_back(kB64Alphabet[(n >> 18) & 0x3F]);
        out.push_back(kB64Alphabet[(n >> 12) & 0x3F]);
        out.push_back(kB64Alphabet[(n >> 6) & 0x3F]);
        out.push_back(kB64Alphabet[n & 0x3F]);
        i += 3;
    }
    size_t rem = input.size() - i;
    if (rem == 1) {
        uint32_t n = static_cast<uint8_t>(input[i]) << 16;
        out.push_back(kB64Alphabet[(n >> 18) & 0x3F]);
        out.push_back(kB64Alphabet[(n >> 12) & 0x3F]);
    } else if (rem == 2) {
        uint32_t n = (static_cast<uint8_t>(input[i]) << 16) |
                     (static_cast<uint8_t>(input[i + 1]) << 8);
        out.push_back(kB64Alphabet[(n >> 18) & 0x3F]);
        out.push_back(kB64Alphabet[(n >> 12) & 0x3F]);
        out.push_back(kB64Alphabet[(n >> 6) & 0x3F]);
    }
    return out;
}

std::optional<std::string> base64url_decode(std::string_view input) {
    // Unpadded input: length mod 4 of 1 is never valid.
    if (input.size() % 4 == 1) return std::nullopt;
    std::string out;
    out.reserve(input.size() / 4 * 3 + 3);
    uint32_t acc = 0;
    int bits = 0;
    for (char c : input) {
        int v = b64_value(c);
        if (v < 0) return std::nullopt;
        acc = (acc << 6) | static_cast<uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<char>((acc >> bits) & 0xFF));
        }
    }
    // Leftover bits must be zero padding from the encoder.
    if (bits > 0 && (acc & ((1u << bits) - 1)) != 0) return std::nullopt;
    return out;
}

std::string sha256_raw(std::string_view data) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(),
           digest.data());
    return std::string(reinterpret_cast<char*>(digest.data()), digest.size());
}

std::string hex_encode(std::string_view data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (unsigned char c : data) {
        out.push_back(kHexDigits[c >> 4]);
        out.push_back(kHexDigits[c & 0x0F]);
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    return hex_encode(sha256_raw(data));
}

std::string hmac_sha256(std::string_view key, std::string_view data) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
    unsigned int len = 0;
    HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
         reinterpret_cast<const unsigned char*>(data.data()), data.size(),
         digest.data(), &len);
    return std::string(reinterpret_cast<char*>(digest.data()), len);
}

bool constant_time_equal(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

std::string random_hex_id() {
    std::array<unsigned char, 16> buf{};
    RAND_bytes(buf.data(), static_cast<int>(buf.size()));
    return hex_encode(
        std::string_view(reinterpret_cast<char*>(buf.data()), buf.size()));
}

IdGenerator seeded_id_generator(uint64_t seed) {
    auto rng = std::make_shared<std::mt19937_64>(seed);
    return [rng]() {
        std::string out;
        out.reserve(32);
        for (int i = 0; i < 2; ++i) {
            uint64_t v = (*rng)();
            for (int j = 0; j < 16; ++j) {
                out.push_back(kHexDigits[(v >> (60 - 4 * j)) & 0xF]);
            }
        }
        return out;
    };
}

}  // namespace fedauth
