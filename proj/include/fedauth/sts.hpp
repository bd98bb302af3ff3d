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

// The relying party: validates incoming OIDC tokens against configured
// trust (role trust policies and workload-identity pools/providers) and
// issues short-lived native credentials. Fail-closed: every error path ends
// with no credential issued.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "fedauth/clock.hpp"
#include "fedauth/condition.hpp"
#include "fedauth/crypto_util.hpp"
#include "fedauth/error.hpp"
#include "fedauth/jwt.hpp"

namespace fedauth::sts {

/// Hard ceiling on every credential lifetime, seconds.
inline constexpr int64_t kMaxCredentialLifetime = 3600;

struct OidcProviderRegistration {
    std::string provider_id;
    std::string issuer;  // unique among registrations
    std::vector<std::string> audiences;  // pinned, non-empty
    std::string jwks_uri;                // empty when inline_jwks is set
    std::optional<jwt::JwkSet> inline_jwks;
    int64_t jwks_cache_ttl = 300;
};

struct TrustPolicy {
    static constexpr const char* kAction = "sts:AssumeRoleWithWebIdentity";

    std::string role_name;
    std::string federated_principal;  // provider_id
    cond::StringEqualsCondition condition;
    std::vector<std::string> scopes;  // labels granted to issued credentials
};

/// Per-issuer provider configuration inside a workload identity pool.
struct ProviderConfig {
    std::string provider_id;
    std::string issuer;  // accepted issuer; may be empty if account_id set
    std::string aws_account_id;  // source-account discriminator, optional
    std::string condition_source;
    cond::ConditionExpr attribute_condition;
    cond::AttributeMapping attribute_mapping;  // must define google.subject
    std::string service_account;  // linked impersonation target
    std::vector<std::string> scopes;
};

struct WorkloadIdentityPool {
    std::string pool_id;
    std::vector<ProviderConfig> providers;  // ids unique within the pool
};

/// Returned exactly once to the caller; the service keeps only hashes of the
/// secret parts.
struct NativeCredential {
    std::string credential_id;
    std::string secret;
    std::string session_token;
    int64_t expires_at;
    std::vector<std::string> scopes;
    std::string principal;
};

struct FederatedToken {
    std::string token_id;
    std::string value;  // opaque, presented back for impersonation
    std::string pool_id;
    std::string provider_id;
    std::map<std::string, std::string> attributes;  // includes google.subject
    int64_t expires_at;
};

struct CredentialPresentation {
    std::string credential_id;
    std::string secret;
    std::string session_token;
};

struct StsAuditEntry {
    std::string kind;  // assume_role | token_exchange | impersonate | resource_check | admin
    bool success;
    std::string detail;
    std::string jwt_id;
    int64_t at;
};

/// Fetches a JWKS document from a URI. Injectable: in-process harness wiring
/// resolves logical issuers directly, the HTTP stack does a real GET.
using JwksFetcher = std::function<Result<jwt::JwkSet>(const std::string& uri)>;

struct StsConfig {
    int64_t clock_skew = jwt::kDefaultClockSkew;
    int64_t default_jwks_cache_ttl = 300;
};

class StsService {
  public:
    StsService(StsConfig config, std::shared_ptr<Clock> clock,
               JwksFetcher fetcher = nullptr, IdGenerator id_gen = random_hex_id);

    // --- administrative surface (serialized, atomically visible) ---

    Result<std::string> register_provider(OidcProviderRegistration reg);
    Status revoke_provider(const std::string& provider_id);
    Status apply_trust_policy(TrustPolicy policy);
    Status apply_pool(WorkloadIdentityPool pool);

    // --- exchange pipeline ---

    /// Role assumption: resolve provider from the token's iss, verify
    /// signature/issuer/audience/time, then evaluate the trust policy's
    /// StringEquals condition. Credential lifetime is
    /// min(3600, remaining token validity).
    Result<NativeCredential> assume_role_with_web_identity(
        const jwt::SignedJwt& token, const std::string& role_name);

    /// Pool exchange: verify the assertion token, build the attribute
    /// context, evaluate attribute_condition, apply attribute_mapping.
    Result<FederatedToken> exchange_federated_token(
        const jwt::SignedJwt& token, const std::string& pool_id,
        const std::string& provider_id);

    /// Trades an unexpired federated token for a native credential for the
    /// provider's linked service account only.
    Result<NativeCredential> impersonate_service_account(
        const std::string& federated_token_value,
        const std::string& target_account);

    /// Allow iff the presentation hashes match a known credential, it is
    /// unexpired, and the resource label is in scope. Never an error: a
    /// boolean decision plus an audit entry.
    bool check_access(const CredentialPresentation& presentation,
                      const std::string& resource_label);

    // --- introspection ---

    [[nodiscard]] std::vector<StsAuditEntry> audit_log() const;
    [[nodiscard]] size_t issued_credential_count() const;
    [[nodiscard]] bool has_provider(const std::string& provider_id) const;
    [[nodiscard]] const StsConfig& config() const { return config_; }

  private:
    struct ProviderState {
        OidcProviderRegistration reg;
        jwt::JwkSet cached_jwks;
        int64_t fetched_at = 0;
    };

    struct CredentialRecord {
        std::string credential_id;
        std::string secret_hash;
        std::string session_hash;
        int64_t expires_at;
        std::vector<std::string> scopes;
        std::string principal;
    };

    struct FederatedRecord {
        std::string token_id;
        std::string value_hash;
        std::string pool_id;
        std::string provider_id;
        std::map<std::string, std::string> attributes;
        int64_t expires_at;
    };

    // Refreshes the provider's JWKS when stale; on UnknownKeyId callers force
    // one refresh and retry.
    Result<jwt::JwkSet> provider_jwks(const std::string& provider_id,
                                      bool force_refresh);

    Result<jwt::JwtClaims> verify_against_provider(
        const jwt::SignedJwt& token, const std::string& provider_id,
        int64_t now);

    NativeCredential issue_credential(const std::string& principal,
                                      std::vector<std::string> scopes,
                                      int64_t expires_at);

    void audit(const std::string& kind, bool success, const std::string& detail,
               const std::string& jwt_id);

    StsConfig config_;
    std::shared_ptr<Clock> clock_;
    JwksFetcher fetcher_;
    IdGenerator id_gen_;

    // Configuration is read-mostly: exchanges take the shared side, admin
    // mutations the exclusive side, so an exchange sees pre- or post-state,
    // never a mix.
    mutable std::shared_mutex config_mu_;
    std::map<std::string, ProviderState> providers_;      // by provider_id
    std::map<std::string, std::string> issuer_to_provider_;
    std::map<std::string, TrustPolicy> policies_;          // by role_name
    std::map<std::string, WorkloadIdentityPool> pools_;    // by pool_id

    mutable std::mutex store_mu_;  // credentials, federated tokens, audit
    std::map<std::string, CredentialRecord> credentials_;  // by credential_id
    std::map<std::string, FederatedRecord> federated_;     // by value hash
    std::vector<StsAuditEntry> audit_;
};

}  // namespace fedauth::sts
