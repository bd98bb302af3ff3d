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

// Baseline static-key request signing in the SigV4 shape: canonical request,
// string-to-sign, HMAC-SHA256 signing-key chain. Static keys have no expiry
// field; that is the property the federated model exists to remove, and the
// harness contrasts the two.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedauth/error.hpp"

namespace fedauth::legacy {

struct StaticKey {
    std::string access_key_id;  // unique in the key store
    std::string secret_key;
    int64_t created_at = 0;
    std::vector<std::string> permissions;
};

struct HttpRequest {
    std::string method;
    std::string path;  // absolute path, no query
    std::vector<std::pair<std::string, std::string>> query;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string payload;

    [[nodiscard]] std::optional<std::string> header(std::string_view name) const;
};

struct CanonicalRequest {
    std::string method;
    std::string canonical_uri;
    std::string canonical_query;
    std::string canonical_headers;  // lowercase, sorted, newline-joined
    std::string signed_headers;     // ';'-joined header names
    std::string payload_hash;       // hex sha256

    [[nodiscard]] std::string to_string() const;
};

/// Deterministic normalization: header names lowercased and sorted, values
/// trimmed with inner whitespace collapsed, query parameters sorted by key
/// then value. Requires host and x-amz-date headers.
Result<CanonicalRequest> canonicalize(const HttpRequest& request);

/// `date` is the credential-scope date (YYYYMMDD); the timestamp signed into
/// the string-to-sign comes from the request's x-amz-date header.
std::string credential_scope(const std::string& date, const std::string& region,
                             const std::string& service);

Result<std::string> string_to_sign(const HttpRequest& request,
                                   const std::string& date,
                                   const std::string& region,
                                   const std::string& service);

/// Full authorization header:
/// AWS4-HMAC-SHA256 Credential=<id>/<scope>, SignedHeaders=<h;h>, Signature=<hex>
Result<std::string> sign(const HttpRequest& request, const StaticKey& key,
                         const std::string& date, const std::string& region,
                         const std::string& service);

class LegacyKeystore {
  public:
    void add(StaticKey key);
    [[nodiscard]] const StaticKey* find(const std::string& access_key_id) const;

    Result<std::string> sign_with(const std::string& access_key_id,
                                  const HttpRequest& request,
                                  const std::string& date,
                                  const std::string& region,
                                  const std::string& service) const;

  private:
    std::map<std::string, StaticKey> keys_;
};

struct VerifyDecision {
    bool accepted = false;
    std::string reason;
};

/// Recomputes the signature with the stored secret and compares in constant
/// time. There is deliberately no expiry check: a correctly signed request
/// is accepted regardless of key age or `now`.
VerifyDecision verify(const HttpRequest& request,
                      const std::string& authorization_header,
                      const LegacyKeystore& keystore, int64_t now);

}  // namespace fedauth::legacy
