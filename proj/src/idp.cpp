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

#include "fedauth/idp.hpp"

#include <algorithm>

namespace fedauth::idp {

using nlohmann::json;

bool is_dns_label(std::string_view s) {
    if (s.empty() || s.size() > 63) return false;
    auto alnum = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    };
    if (!alnum(s.front()) || !alnum(s.back())) return false;
    return std::all_of(s.begin(), s.end(),
                       [&](char c) { return alnum(c) || c == '-'; });
}

IdpService::IdpService(IdpConfig config, std::shared_ptr<Clock> clock,
                       IdGenerator id_gen)
    : config_(std::move(config)),
      clock_(std::move(clock)),
      id_gen_(std::move(id_gen)),
      keystore_(config_.algorithm, clock_, config_.rotation_overlap, id_gen_) {}

Result<PodIdentity> IdpService::register_pod(const ServiceAccount& sa,
                                             const std::string& pod_name) {
    if (!is_dns_label(sa.ns)) {
        return Error(Errc::InvalidName, "namespace is not a DNS label: " + sa.ns);
    }
    if (!is_dns_label(sa.name)) {
        return Error(Errc::InvalidName,
                     "serviceaccount is not a DNS label: " + sa.name);
    }
    if (pod_name.empty()) {
        return Error(Errc::InvalidName, "pod name is empty");
    }
    PodIdentity pod{sa, pod_name, id_gen_()};
    std::lock_guard lock(mu_);
    pods_[pod.pod_uid] = pod;
    return pod;
}

Status IdpService::deregister_pod(const std::string& pod_uid) {
    std::lock_guard lock(mu_);
    if (pods_.erase(pod_uid) == 0) {
        return Error(Errc::UnknownPod, "no pod with uid " + pod_uid);
    }
    return {};
}

int64_t IdpService::clamp_ttl(int64_t requested) const {
    return std::clamp(requested, config_.min_ttl, config_.max_ttl);
}

Result<IssuedToken> IdpService::issue_bound_token(const std::string& pod_uid,
                                                  const TokenRequestSpec& spec) {
    if (spec.audience.empty()) {
        return Error(Errc::AudienceEmpty, "token request has no audience");
    }

    PodIdentity pod;
    {
        std::lock_guard lock(mu_);
        auto it = pods_.find(pod_uid);
        if (it == pods_.end()) {
            return Error(Errc::UnknownPod, "no pod with uid " + pod_uid);
        }
        pod = it->second;
    }

    const int64_t now = clock_->now();
    const int64_t ttl = clamp_ttl(spec.expiration_seconds);

    jwt::JwtClaims claims;
    claims.issuer = config_.issuer;
    claims.subject = pod.service_account.subject();
    claims.audience = {spec.audience};
    claims.issued_at = now;
    claims.expires_at = now + ttl;
    claims.jwt_id = id_gen_();
    claims.extra["kubernetes"] = {
        {"namespace", pod.service_account.ns},
        {"serviceaccount", pod.service_account.name},
        {"pod_name", pod.pod_name},
        {"pod_uid", pod.pod_uid},
    };

    auto token = keystore_.mint(claims);
    if (!token.ok()) return token.error();

    {
        std::lock_guard lock(mu_);
        audit_.push_back({claims.jwt_id, pod.pod_uid, spec.audience, now,
                          claims.expires_at});
    }
    return IssuedToken{std::move(token).value(), claims.expires_at};
}

Result<ProjectedToken> IdpService::project_token(const std::string& pod_uid,
                                                 const TokenRequestSpec& spec) {
    auto issued = issue_bound_token(pod_uid, spec);
    if (!issued.ok()) return issued.error();
    return ProjectedToken{std::move(issued.value().token),
                          issued.value().expires_at,
                          "/var/run/secrets/tokens/token"};
}

json IdpService::discovery_document() const {
    json doc = json::object();
    doc["issuer"] = config_.issuer;
    doc["jwks_uri"] = config_.issuer + "/openid/v1/jwks";
    doc["response_types_supported"] = {"id_token"};
    doc["subject_types_supported"] = {"public"};
    doc["id_token_signing_alg_values_supported"] = {"RS256", "ES256"};
    return doc;
}

jwt::JwkSet IdpService::jwks() const { return keystore_.jwks(); }

jwt::Keystore::Rotation IdpService::rotate_key() { return keystore_.rotate(); }

std::vector<IdpAuditEntry> IdpService::audit_log() const {
    std::lock_guard lock(mu_);
    return audit_;
}

std::optional<PodIdentity> IdpService::find_pod(
    const std::string& pod_uid) const {
    std::lock_guard lock(mu_);
    auto it = pods_.find(pod_uid);
    if (it == pods_.end()) return std::nullopt;
    return it->second;
}

}  // namespace fedauth::idp
