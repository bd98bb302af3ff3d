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

#include "fedauth/jwt.hpp"

#include <algorithm>
#include <cstring>

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ecdsa.h>
#include <openssl/evp.h>
#include <openssl/param_build.h>

namespace fedauth::jwt {

using nlohmann::json;

namespace {

// Registered claim names; extra claims must not shadow them.
constexpr const char* kRegisteredClaims[] = {"iss", "sub", "aud", "exp",
                                             "iat", "nbf", "jti"};

struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;

struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

std::string bn_to_bin(const BIGNUM* bn, int pad_to = 0) {
    int len = pad_to > 0 ? pad_to : BN_num_bytes(bn);
    std::string out(static_cast<size_t>(len), '\0');
    if (pad_to > 0) {
        BN_bn2binpad(bn, reinterpret_cast<unsigned char*>(out.data()), len);
    } else {
        BN_bn2bin(bn, reinterpret_cast<unsigned char*>(out.data()));
    }
    return out;
}

// ES256 JWS signatures are raw r||s (32 bytes each); OpenSSL produces DER.
std::optional<std::string> ecdsa_der_to_raw(std::string_view der) {
    const auto* p = reinterpret_cast<const unsigned char*>(der.data());
    ECDSA_SIG* sig = d2i_ECDSA_SIG(nullptr, &p, static_cast<long>(der.size()));
    if (sig == nullptr) return std::nullopt;
    const BIGNUM* r = nullptr;
    const BIGNUM* s = nullptr;
    ECDSA_SIG_get0(sig, &r, &s);
    std::string raw = bn_to_bin(r, 32) + bn_to_bin(s, 32);
    ECDSA_SIG_free(sig);
    return raw;
}

std::optional<std::string> ecdsa_raw_to_der(std::string_view raw) {
    if (raw.size() != 64) return std::nullopt;
    BIGNUM* r = BN_bin2bn(reinterpret_cast<const unsigned char*>(raw.data()),
                          32, nullptr);
    BIGNUM* s = BN_bin2bn(
        reinterpret_cast<const unsigned char*>(raw.data() + 32), 32, nullptr);
    ECDSA_SIG* sig = ECDSA_SIG_new();
    if (sig == nullptr || r == nullptr || s == nullptr ||
        ECDSA_SIG_set0(sig, r, s) != 1) {
        BN_free(r);
        BN_free(s);
        ECDSA_SIG_free(sig);
        return std::nullopt;
    }
    unsigned char* der = nullptr;
    int len = i2d_ECDSA_SIG(sig, &der);
    ECDSA_SIG_free(sig);
    if (len <= 0) return std::nullopt;
    std::string out(reinterpret_cast<char*>(der), static_cast<size_t>(len));
    OPENSSL_free(der);
    return out;
}

std::optional<std::string> sign_bytes(EVP_PKEY* pkey, Algorithm alg,
                                      std::string_view data) {
    MdCtxPtr ctx(EVP_MD_CTX_new());
    if (!ctx) return std::nullopt;
    if (EVP_DigestSignInit(ctx.get(), nullptr, EVP_sha256(), nullptr, pkey) !=
        1) {
        return std::nullopt;
    }
    size_t len = 0;
    const auto* in = reinterpret_cast<const unsigned char*>(data.data());
    if (EVP_DigestSign(ctx.get(), nullptr, &len, in, data.size()) != 1) {
        return std::nullopt;
    }
    std::string sig(len, '\0');
    if (EVP_DigestSign(ctx.get(), reinterpret_cast<unsigned char*>(sig.data()),
                       &len, in, data.size()) != 1) {
        return std::nullopt;
    }
    sig.resize(len);
    if (alg == Algorithm::ES256) return ecdsa_der_to_raw(sig);
    return sig;
}

bool verify_bytes(EVP_PKEY* pkey, Algorithm alg, std::string_view data,
                  std::string_view signature) {
    std::string der;
    if (alg == Algorithm::ES256) {
        auto converted = ecdsa_raw_to_der(signature);
        if (!converted) return false;
        der = std::move(*converted);
        signature = der;
    }
    MdCtxPtr ctx(EVP_MD_CTX_new());
    if (!ctx) return false;
    if (EVP_DigestVerifyInit(ctx.get(), nullptr, EVP_sha256(), nullptr,
                             pkey) != 1) {
        return false;
    }
    return EVP_DigestVerify(
               ctx.get(),
               reinterpret_cast<const unsigned char*>(signature.data()),
               signature.size(),
               reinterpret_cast<const unsigned char*>(data.data()),
               data.size()) == 1;
}

// Rebuilds a public EVP_PKEY from JWK parameters.
PkeyPtr pkey_from_jwk(const json& jwk) {
    if (!jwk.is_object() || !jwk.contains("kty")) return nullptr;
    const std::string kty = jwk.value("kty", "");

    OSSL_PARAM_BLD* bld = OSSL_PARAM_BLD_new();
    if (bld == nullptr) return nullptr;
    EVP_PKEY* pkey = nullptr;
    BIGNUM* n = nullptr;
    BIGNUM* e = nullptr;
    std::string point;

    if (kty == "RSA") {
        auto nb = base64url_decode(jwk.value("n", ""));
        auto eb = base64url_decode(jwk.value("e", ""));
        if (!nb || !eb || nb->empty() || eb->empty()) {
            OSSL_PARAM_BLD_free(bld);
            return nullptr;
        }
        n = BN_bin2bn(reinterpret_cast<const unsigned char*>(nb->data()),
                      static_cast<int>(nb->size()), nullptr);
        e = BN_bin2bn(reinterpret_cast<const unsigned char*>(eb->data()),
                      static_cast<int>(eb->size()), nullptr);
        OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_N, n);
        OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_E, e);
    } else if (kty == "EC") {
        auto xb = base64url_decode(jwk.value("x", ""));
        auto yb = base64url_decode(jwk.value("y", ""));
        if (!xb || !yb || xb->size() != 32 || yb->size() != 32 ||
            jwk.value("crv", "") != "P-256") {
            OSSL_PARAM_BLD_free(bld);
            return nullptr;
        }
        point = "\x04" + *xb + *yb;
        OSSL_PARAM_BLD_push_utf8_string(bld, OSSL_PKEY_PARAM_GROUP_NAME,
                                        "prime256v1", 0);
        OSSL_PARAM_BLD_push_octet_string(bld, OSSL_PKEY_PARAM_PUB_KEY,
                                         point.data(), point.size());
    } else {
        OSSL_PARAM_BLD_free(bld);
        return nullptr;
    }

    OSSL_PARAM* params = OSSL_PARAM_BLD_to_param(bld);
    EVP_PKEY_CTX* ctx = EVP_PKEY_CTX_new_from_name(
        nullptr, kty == "RSA" ? "RSA" : "EC", nullptr);
    if (params != nullptr && ctx != nullptr &&
        EVP_PKEY_fromdata_init(ctx) == 1) {
        EVP_PKEY_fromdata(ctx, &pkey, EVP_PKEY_PUBLIC_KEY, params);
    }
    EVP_PKEY_CTX_free(ctx);
    OSSL_PARAM_free(params);
    OSSL_PARAM_BLD_free(bld);
    BN_free(n);
    BN_free(e);
    return PkeyPtr(pkey);
}

Result<std::array<std::string, 3>> split_compact(const SignedJwt& token) {
    const std::string& s = token.compact;
    size_t first = s.find('.');
    size_t second = first == std::string::npos ? std::string::npos
                                               : s.find('.', first + 1);
    if (first == std::string::npos || second == std::string::npos ||
        s.find('.', second + 1) != std::string::npos) {
        return Error(Errc::Malformed, "token must have exactly three segments");
    }
    return std::array<std::string, 3>{s.substr(0, first),
                                      s.substr(first + 1, second - first - 1),
                                      s.substr(second + 1)};
}

}  // namespace

std::string_view algorithm_name(Algorithm alg) {
    switch (alg) {
        case Algorithm::RS256:
            return "RS256";
        case Algorithm::ES256:
            return "ES256";
    }
    return "ES256";
}

std::optional<Algorithm> algorithm_from_name(std::string_view name) {
    if (name == "RS256") return Algorithm::RS256;
    if (name == "ES256") return Algorithm::ES256;
    return std::nullopt;
}

json JwtClaims::to_json() const {
    json payload = json::object();
    payload["iss"] = issuer;
    payload["sub"] = subject;
    payload["aud"] = audience;
    payload["exp"] = expires_at;
    payload["iat"] = issued_at;
    if (not_before) payload["nbf"] = *not_before;
    payload["jti"] = jwt_id;
    if (extra.is_object()) {
        for (const auto& [k, v] : extra.items()) payload[k] = v;
    }
    return payload;
}

Result<JwtClaims> JwtClaims::from_json(const json& payload) {
    if (!payload.is_object()) {
        return Error(Errc::Malformed, "claims payload is not a JSON object");
    }
    JwtClaims claims;
    claims.issuer = payload.value("iss", "");
    claims.subject = payload.value("sub", "");
    if (payload.contains("aud")) {
        const auto& aud = payload["aud"];
        if (aud.is_string()) {
            claims.audience.push_back(aud.get<std::string>());
        } else if (aud.is_array()) {
            for (const auto& a : aud) {
                if (!a.is_string()) {
                    return Error(Errc::Malformed, "aud entries must be strings");
                }
                claims.audience.push_back(a.get<std::string>());
            }
        } else {
            return Error(Errc::Malformed, "aud must be string or array");
        }
    }
    if (payload.contains("exp")) {
        if (!payload["exp"].is_number_integer()) {
            return Error(Errc::Malformed, "exp must be an integer");
        }
        claims.expires_at = payload["exp"].get<int64_t>();
    }
    if (payload.contains("iat")) {
        if (!payload["iat"].is_number_integer()) {
            return Error(Errc::Malformed, "iat must be an integer");
        }
        claims.issued_at = payload["iat"].get<int64_t>();
    }
    if (payload.contains("nbf")) {
        if (!payload["nbf"].is_number_integer()) {
            return Error(Errc::Malformed, "nbf must be an integer");
        }
        claims.not_before = payload["nbf"].get<int64_t>();
    }
    claims.jwt_id = payload.value("jti", "");
    for (const auto& [k, v] : payload.items()) {
        bool registered =
            std::any_of(std::begin(kRegisteredClaims),
                        std::end(kRegisteredClaims),
                        [&k](const char* name) { return k == name; });
        if (!registered) claims.extra[k] = v;
    }
    return claims;
}

Status validate_claims(const JwtClaims& claims) {
    if (claims.expires_at <= claims.issued_at) {
        return Error(Errc::InvalidClaims,
                     "expires_at must be greater than issued_at");
    }
    if (claims.audience.empty()) {
        return Error(Errc::InvalidClaims, "audience list is empty");
    }
    for (const auto& a : claims.audience) {
        if (a.empty()) {
            return Error(Errc::InvalidClaims, "audience entry is empty");
        }
    }
    if (claims.jwt_id.empty()) {
        return Error(Errc::InvalidClaims, "jwt_id is empty");
    }
    if (!claims.extra.is_object()) {
        return Error(Errc::InvalidClaims, "extra claims must be an object");
    }
    for (const auto& [k, v] : claims.extra.items()) {
        for (const char* name : kRegisteredClaims) {
            if (k == name) {
                return Error(Errc::InvalidClaims,
                             "extra claim shadows registered claim: " + k);
            }
        }
    }
    return {};
}

struct SigningKey::Impl {
    EVP_PKEY* pkey = nullptr;
    ~Impl() { EVP_PKEY_free(pkey); }
};

Result<SigningKey> SigningKey::generate(Algorithm alg, std::string key_id) {
    if (key_id.empty()) {
        return Error(Errc::InvalidClaims, "key_id must be non-empty");
    }
    EVP_PKEY* pkey = nullptr;
    if (alg == Algorithm::RS256) {
        pkey = EVP_PKEY_Q_keygen(nullptr, nullptr, "RSA", size_t{2048});
    } else {
        pkey = EVP_PKEY_Q_keygen(nullptr, nullptr, "EC", "P-256");
    }
    if (pkey == nullptr) {
        return Error(Errc::UnsupportedAlgorithm, "key generation failed");
    }
    SigningKey key;
    key.key_id_ = std::move(key_id);
    key.alg_ = alg;
    key.impl_ = std::make_shared<Impl>();
    key.impl_->pkey = pkey;
    return key;
}

json SigningKey::public_jwk() const {
    json jwk = json::object();
    jwk["kid"] = key_id_;
    jwk["use"] = "sig";
    jwk["alg"] = std::string(algorithm_name(alg_));
    if (alg_ == Algorithm::RS256) {
        jwk["kty"] = "RSA";
        BIGNUM* n = nullptr;
        BIGNUM* e = nullptr;
        EVP_PKEY_get_bn_param(impl_->pkey, OSSL_PKEY_PARAM_RSA_N, &n);
        EVP_PKEY_get_bn_param(impl_->pkey, OSSL_PKEY_PARAM_RSA_E, &e);
        jwk["n"] = base64url_encode(bn_to_bin(n));
        jwk["e"] = base64url_encode(bn_to_bin(e));
        BN_free(n);
        BN_free(e);
    } else {
        jwk["kty"] = "EC";
        jwk["crv"] = "P-256";
        BIGNUM* x = nullptr;
        BIGNUM* y = nullptr;
        EVP_PKEY_get_bn_param(impl_->pkey, OSSL_PKEY_PARAM_EC_PUB_X, &x);
        EVP_PKEY_get_bn_param(impl_->pkey, OSSL_PKEY_PARAM_EC_PUB_Y, &y);
        jwk["x"] = base64url_encode(bn_to_bin(x, 32));
        jwk["y"] = base64url_encode(bn_to_bin(y, 32));
        BN_free(x);
        BN_free(y);
    }
    return jwk;
}

json JwkSet::to_json() const {
    json doc = json::object();
    doc["keys"] = json::array();
    for (const auto& k : keys) doc["keys"].push_back(k);
    return doc;
}

Result<JwkSet> JwkSet::from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("keys") || !doc["keys"].is_array()) {
        return Error(Errc::Malformed, "JWKS document must have a keys array");
    }
    JwkSet set;
    for (const auto& k : doc["keys"]) {
        if (!k.is_object() || !k.contains("kid") || !k["kid"].is_string()) {
            return Error(Errc::Malformed, "JWK entry missing kid");
        }
        if (set.find(k["kid"].get<std::string>()) != nullptr) {
            return Error(Errc::Malformed, "duplicate kid in JWKS");
        }
        set.keys.push_back(k);
    }
    return set;
}

const json* JwkSet::find(std::string_view key_id) const {
    for (const auto& k : keys) {
        if (k.value("kid", "") == key_id) return &k;
    }
    return nullptr;
}

Result<SignedJwt> mint_jwt(const JwtClaims& claims, const SigningKey& key) {
    if (!key.valid()) {
        return Error(Errc::UnsupportedAlgorithm, "signing key not initialized");
    }
    if (auto st = validate_claims(claims); !st.ok()) return st.error();

    json header = json::object();
    header["alg"] = std::string(algorithm_name(key.algorithm()));
    header["kid"] = key.key_id();
    header["typ"] = "JWT";

    std::string signing_input = base64url_encode(header.dump()) + "." +
                                base64url_encode(claims.to_json().dump());
    auto sig = sign_bytes(key.impl()->pkey, key.algorithm(), signing_input);
    if (!sig) {
        return Error(Errc::UnsupportedAlgorithm, "signing operation failed");
    }
    return SignedJwt{signing_input + "." + base64url_encode(*sig)};
}

Result<UnverifiedJwt> decode_unverified(const SignedJwt& token) {
    auto segments = split_compact(token);
    if (!segments.ok()) return segments.error();
    const auto& [h, p, s] = segments.value();

    auto header_bytes = base64url_decode(h);
    auto payload_bytes = base64url_decode(p);
    if (!header_bytes || !payload_bytes || !base64url_decode(s)) {
        return Error(Errc::Malformed, "segment is not valid base64url");
    }
    json header = json::parse(*header_bytes, nullptr, false);
    json payload = json::parse(*payload_bytes, nullptr, false);
    if (header.is_discarded() || !header.is_object() ||
        payload.is_discarded()) {
        return Error(Errc::Malformed, "header or payload is not valid JSON");
    }
    auto claims = JwtClaims::from_json(payload);
    if (!claims.ok()) return claims.error();
    return UnverifiedJwt{std::move(header), std::move(claims).value()};
}

Result<JwtClaims> verify_jwt(const SignedJwt& token, const JwkSet& keys,
                             const std::string& expected_issuer,
                             const std::string& expected_audience, int64_t now,
                             int64_t skew) {
    auto segments = split_compact(token);
    if (!segments.ok()) return segments.error();
    const auto& [h, p, s] = segments.value();

    auto header_bytes = base64url_decode(h);
    if (!header_bytes) {
        return Error(Errc::Malformed, "header is not valid base64url");
    }
    json header = json::parse(*header_bytes, nullptr, false);
    if (header.is_discarded() || !header.is_object()) {
        return Error(Errc::Malformed, "header is not valid JSON");
    }

    // (a) key id resolves in the published set
    const std::string kid = header.value("kid", "");
    const json* jwk = keys.find(kid);
    if (jwk == nullptr) {
        return Error(Errc::UnknownKeyId, "no published key with kid " + kid);
    }
    auto alg = algorithm_from_name(header.value("alg", ""));
    if (!alg) {
        return Error(Errc::UnsupportedAlgorithm,
                     "unsupported alg " + header.value("alg", ""));
    }
    if (jwk->value("alg", "") != algorithm_name(*alg)) {
        return Error(Errc::BadSignature,
                     "token alg does not match published key alg");
    }

    // (b) signature
    auto sig_bytes = base64url_decode(s);
    if (!sig_bytes) {
        return Error(Errc::Malformed, "signature is not valid base64url");
    }
    PkeyPtr pkey = pkey_from_jwk(*jwk);
    if (!pkey) {
        return Error(Errc::UnknownKeyId, "published key is not usable");
    }
    std::string signing_input = h + "." + p;
    if (!verify_bytes(pkey.get(), *alg, signing_input, *sig_bytes)) {
        return Error(Errc::BadSignature, "signature verification failed");
    }

    auto payload_bytes = base64url_decode(p);
    if (!payload_bytes) {
        return Error(Errc::Malformed, "payload is not valid base64url");
    }
    json payload = json::parse(*payload_bytes, nullptr, false);
    if (payload.is_discarded()) {
        return Error(Errc::Malformed, "payload is not valid JSON");
    }
    auto claims_result = JwtClaims::from_json(payload);
    if (!claims_result.ok()) return claims_result.error();
    JwtClaims claims = std::move(claims_result).value();

    // (c) issuer, exact match
    if (claims.issuer != expected_issuer) {
        return Error(Errc::IssuerMismatch,
                     "token issuer " + claims.issuer + " != " + expected_issuer);
    }
    // (d) audience, literal membership
    if (std::find(claims.audience.begin(), claims.audience.end(),
                  expected_audience) == claims.audience.end()) {
        return Error(Errc::AudienceMismatch,
                     "token audience does not include " + expected_audience);
    }
    // (e) validity window with skew
    if (now >= claims.expires_at + skew) {
        return Error(Errc::Expired, "token expired at " +
                                        std::to_string(claims.expires_at));
    }
    if (claims.not_before && now < *claims.not_before - skew) {
        return Error(Errc::NotYetValid,
                     "token not valid before " +
                         std::to_string(*claims.not_before));
    }
    return claims;
}

Keystore::Keystore(Algorithm alg, std::shared_ptr<Clock> clock,
                   int64_t overlap_window, IdGenerator key_id_gen)
    : alg_(alg),
      clock_(std::move(clock)),
      overlap_window_(overlap_window),
      key_id_gen_(std::move(key_id_gen)) {
    rotate();
}

Keystore::Rotation Keystore::rotate() {
    std::lock_guard lock(mu_);
    const int64_t now = clock_->now();
    if (active_.valid()) {
        retired_.push_back({active_.public_jwk(), now + overlap_window_});
    }
    std::erase_if(retired_,
                  [now](const Retired& r) { return now >= r.retire_at; });
    auto key = SigningKey::generate(alg_, key_id_gen_());
    // Generation only fails on allocation failure; leave the old key active
    // in that case rather than losing the ability to mint.
    if (key.ok()) active_ = std::move(key).value();

    JwkSet set;
    set.keys.push_back(active_.public_jwk());
    for (const auto& r : retired_) {
        if (now < r.retire_at) set.keys.push_back(r.jwk);
    }
    return Rotation{active_.key_id(), std::move(set)};
}

Result<SignedJwt> Keystore::mint(const JwtClaims& claims) {
    // Signing happens under the lock so a rotation can never retire the key
    // mid-mint; published-set membership is guaranteed for every token.
    std::lock_guard lock(mu_);
    return mint_jwt(claims, active_);
}

JwkSet Keystore::jwks() const {
    std::lock_guard lock(mu_);
    const int64_t now = clock_->now();
    JwkSet set;
    set.keys.push_back(active_.public_jwk());
    for (const auto& r : retired_) {
        if (now < r.retire_at) set.keys.push_back(r.jwk);
    }
    return set;
}

std::string Keystore::active_key_id() const {
    std::lock_guard lock(mu_);
    return active_.key_id();
}

}  // namespace fedauth::jwt
