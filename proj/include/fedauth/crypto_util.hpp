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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace fedauth {

// Base64url per RFC 4648 section 5, no padding (the JWT wire alphabet).
std::string base64url_encode(std::string_view input);
std::optional<std::string> base64url_decode(std::string_view input);

std::string sha256_hex(std::string_view data);
std::string sha256_raw(std::string_view data);
std::string hmac_sha256(std::string_view key, std::string_view data);
std::string hex_encode(std::string_view data);

/// Constant-time equality for secrets and signatures.
bool constant_time_equal(std::string_view a, std::string_view b);

/// Produces unique identifiers (jwt ids, pod uids, credential ids, secrets).
using IdGenerator = std::function<std::string()>;

/// 128-bit CSPRNG identifier, hex-encoded.
std::string random_hex_id();

/// Deterministic generator for reproducible harness runs. Successive calls
/// with the same seed yield the same id sequence.
IdGenerator seeded_id_generator(uint64_t seed);

}  // namespace fedauth
