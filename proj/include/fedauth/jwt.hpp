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

// Minting, signing, and verification of OIDC-style JWTs, plus JWKS
// publication and key rotation. Shared by the identity provider, the token
// service, and the workload client.

#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedauth/clock.hpp"
#include "fedauth/crypto_util.hpp"
#include "fedauth/error.hpp"

namespace fedauth::jwt {

inline constexpr int64_t kDefaultClockSkew = 30;  // seconds

/// Supported asymmetric signature algorithms. Symmetric JWT algorithms are
/// deliberately absent: the issuer's private key must never be shared with a
/// verifier.
enum class Algorithm { RS256, ES256 };

std::string_view algorithm_name(Algorithm alg);
std::optional<Algorithm> algorithm_from_name(std::string_view name);

/// Identity claims carried by a token. `extra` holds claims beyond the
/// registered set (workload-binding claims such as pod uid and namespace)
/// and is merged into the payload at the top level.
struct JwtClaims {
    std::string issuer;
    std::string subject;
    std::vector<std::string> audience;  // non-empty
    int64_t expires_at = 0;             // unix seconds, > issued_at
    int64_t issued_at = 0;
    std::optional<int64_t> not_before;
    std::string jwt_id;  // unique per issuing key lifetime
    nlohmann::json extra = nlohmann::json::object();

    bool operator==(const JwtClaims&) const = default;

    /// Canonical payload serialization: sorted keys, no whitespace.
    /// Minting the same claims with the same key id is deterministic up to
    /// the signature algorithm.
    nlohmann::json to_json() const;
    static Result<JwtClaims> from_json(const nlohmann::json& payload);
};

/// Checks the claim invariants enforced at mint time.
Status validate_claims(const JwtClaims& claims);

/// Signing key handle. The private material lives only inside the opaque
/// handle; no public operation serializes it.
class SigningKey {
  public:
    SigningKey() = default;

    static Result<SigningKey> generate(Algorithm alg, std::string key_id);

    [[nodiscard]] const std::string& key_id() const { return key_id_; }
    [[nodiscard]] Algorithm algorithm() const { return alg_; }
    [[nodiscard]] bool valid() const { return impl_ != nullptr; }

    /// Public half as a JWK document.
    [[nodiscard]] nlohmann::json public_jwk() const;

    struct Impl;
    [[nodiscard]] const Impl* impl() const { return impl_.get(); }

  private:
    std::string key_id_;
    Algorithm alg_ = Algorithm::ES256;
    std::shared_ptr<Impl> impl_;
};

/// Published key set: public material only, distinct key ids.
struct JwkSet {
    std::vector<nlohmann::json> keys;

    [[nodiscard]] nlohmann::json to_json() const;
    static Result<JwkSet> from_json(const nlohmann::json& doc);

    [[nodiscard]] const nlohmann::json* find(std::string_view key_id) const;
    [[nodiscard]] bool empty() const { return keys.empty(); }
};

/// Compact serialization: header.payload.signature, base64url, no padding.
struct SignedJwt {
    std::string compact;

    bool operator==(const SignedJwt&) const = default;
};

Result<SignedJwt> mint_jwt(const JwtClaims& claims, const SigningKey& key);

/// Full verification pipeline: key lookup, signature, issuer, audience,
/// time window. All checks run in that order; the first failure wins.
/// `expected_audience` must appear literally in the token's audience list.
Result<JwtClaims> verify_jwt(const SignedJwt& token, const JwkSet& keys,
                             const std::string& expected_issuer,
                             const std::string& expected_audience, int64_t now,
                             int64_t skew = kDefaultClockSkew);

/// Parse without any signature or claim check. Carries an explicit marker so
/// callers cannot mistake it for a verified result; used only to read `iss`
/// before key lookup.
struct UnverifiedJwt {
    nlohmann::json header;
    JwtClaims claims;
    static constexpr bool verified = false;
};

Result<UnverifiedJwt> decode_unverified(const SignedJwt& token);

/// Issuer-side key store. Concurrent minting is supported; rotation is
/// serialized against minting so a token is never signed by a key missing
/// from the published set plus overlap window.
class Keystore {
  public:
    /// `overlap_window`: how long rotated-out public keys stay published so
    /// in-flight tokens still verify.
    Keystore(Algorithm alg, std::shared_ptr<Clock> clock,
             int64_t overlap_window, IdGenerator key_id_gen = random_hex_id);

    struct Rotation {
        std::string new_key_id;
        JwkSet jwks;
    };

    /// Installs a fresh active key; previous keys remain published until
    /// now + overlap_window.
    Rotation rotate();

    Result<SignedJwt> mint(const JwtClaims& claims);

    /// Current public set: the active key plus unexpired overlap keys.
    [[nodiscard]] JwkSet jwks() const;

    [[nodiscard]] std::string active_key_id() const;
    [[nodiscard]] Algorithm algorithm() const { return alg_; }

  private:
    struct Retired {
        nlohmann::json jwk;
        int64_t retire_at;
    };

    Algorithm alg_;
    std::shared_ptr<Clock> clock_;
    int64_t overlap_window_;
    IdGenerator key_id_gen_;

    mutable std::mutex mu_;
    SigningKey active_;
    std::vector<Retired> retired_;
};

}  // namespace fedauth::jwt
