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

// Source-environment identity provider: issues bound, audience-scoped
// service-account tokens and publishes OIDC discovery and JWKS documents.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedauth/clock.hpp"
#include "fedauth/crypto_util.hpp"
#include "fedauth/error.hpp"
#include "fedauth/jwt.hpp"

namespace fedauth::idp {

struct ServiceAccount {
    std::string ns;    // namespace, DNS-label-valid
    std::string name;  // DNS-label-valid

    [[nodiscard]] std::string subject() const {
        return "system:serviceaccount:" + ns + ":" + name;
    }
};

/// Lowercase alphanumerics and '-', at most 63 chars, alphanumeric at both
/// ends.
bool is_dns_label(std::string_view s);

struct PodIdentity {
    ServiceAccount service_account;
    std::string pod_name;
    std::string pod_uid;  // unique across this provider's lifetime
};

struct TokenRequestSpec {
    std::string audience;        // exactly one audience per token
    int64_t expiration_seconds;  // clamped into [min_ttl, max_ttl]
};

struct IssuedToken {
    jwt::SignedJwt token;
    int64_t expires_at;
};

/// Token handed to the workload, labeled with the mount path a projected
/// volume would use. No real filesystem is involved.
struct ProjectedToken {
    jwt::SignedJwt token;
    int64_t expires_at;
    std::string mount_path;
};

struct IdpAuditEntry {
    std::string jwt_id;
    std::string pod_uid;
    std::string audience;
    int64_t issued_at;
    int64_t expires_at;
};

struct IdpConfig {
    std::string issuer = "https://idp.local";
    jwt::Algorithm algorithm = jwt::Algorithm::ES256;
    int64_t min_ttl = 600;
    int64_t max_ttl = 86'400;
    int64_t default_ttl = 3600;
    // rotated-out keys stay published for 2x the longest token lifetime
    int64_t rotation_overlap = 2 * 86'400;
};

class IdpService {
  public:
    IdpService(IdpConfig config, std::shared_ptr<Clock> clock,
               IdGenerator id_gen = random_hex_id);

    Result<PodIdentity> register_pod(const ServiceAccount& sa,
                                     const std::string& pod_name);
    Status deregister_pod(const std::string& pod_uid);

    /// Mints a bound token: subject "system:serviceaccount:<ns>:<name>",
    /// single audience, ttl clamped, kubernetes binding claims (namespace,
    /// serviceaccount, pod name, pod uid). Appends to the audit log.
    Result<IssuedToken> issue_bound_token(const std::string& pod_uid,
                                          const TokenRequestSpec& spec);

    /// issue_bound_token plus the projected-volume path label.
    Result<ProjectedToken> project_token(const std::string& pod_uid,
                                         const TokenRequestSpec& spec);

    [[nodiscard]] nlohmann::json discovery_document() const;
    [[nodiscard]] jwt::JwkSet jwks() const;

    jwt::Keystore::Rotation rotate_key();

    [[nodiscard]] const std::string& issuer() const { return config_.issuer; }
    [[nodiscard]] const IdpConfig& config() const { return config_; }
    [[nodiscard]] std::vector<IdpAuditEntry> audit_log() const;
    [[nodiscard]] std::optional<PodIdentity> find_pod(
        const std::string& pod_uid) const;

    [[nodiscard]] int64_t clamp_ttl(int64_t requested) const;

  private:
    IdpConfig config_;
    std::shared_ptr<Clock> clock_;
    IdGenerator id_gen_;
    jwt::Keystore keystore_;

    mutable std::mutex mu_;  // registry and audit log
    std::map<std::string, PodIdentity> pods_;
    std::vector<IdpAuditEntry> audit_;
};

}  // namespace fedauth::idp
