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

#include "fedauth/sts.hpp"

#include <algorithm>

namespace fedauth::sts {

StsService::StsService(StsConfig config, std::shared_ptr<Clock> clock,
                       JwksFetcher fetcher, IdGenerator id_gen)
    : config_(config),
      clock_(std::move(clock)),
      fetcher_(std::move(fetcher)),
      id_gen_(std::move(id_gen)) {}

Result<std::string> StsService::register_provider(OidcProviderRegistration reg) {
    if (reg.provider_id.empty() || reg.issuer.empty()) {
        return Error(Errc::ConfigInvalid,
                     "provider registration needs provider_id and issuer");
    }
    if (reg.audiences.empty()) {
        return Error(Errc::ConfigInvalid,
                     "provider registration needs at least one audience");
    }

    // Fetch outside the exclusive section; validation must not block reads.
    jwt::JwkSet initial;
    int64_t fetched_at = 0;
    if (reg.inline_jwks) {
        initial = *reg.inline_jwks;
    } else {
        if (!fetcher_) {
            return Error(Errc::JwksUnreachable,
                         "no JWKS fetcher configured and no inline JWKS");
        }
        auto fetched = fetcher_(reg.jwks_uri);
        if (!fetched.ok()) {
            return Error(Errc::JwksUnreachable,
                         "could not fetch JWKS from " + reg.jwks_uri + ": " +
                             fetched.error().message);
        }
        initial = std::move(fetched).value();
        fetched_at = clock_->now();
    }

    std::unique_lock lock(config_mu_);
    if (issuer_to_provider_.contains(reg.issuer)) {
        return Error(Errc::DuplicateIssuer,
                     "issuer already registered: " + reg.issuer);
    }
    if (providers_.contains(reg.provider_id)) {
        return Error(Errc::DuplicateProvider,
                     "provider id already registered: " + reg.provider_id);
    }
    std::string id = reg.provider_id;
    issuer_to_provider_[reg.issuer] = id;
    providers_[id] = ProviderState{std::move(reg), std::move(initial),
                                   fetched_at};
    return id;
}

Status StsService::revoke_provider(const std::string& provider_id) {
    std::unique_lock lock(config_mu_);
    auto it = providers_.find(provider_id);
    if (it == providers_.end()) {
        return Error(Errc::UnknownProvider,
                     "no provider with id " + provider_id);
    }
    issuer_to_provider_.erase(it->second.reg.issuer);
    providers_.erase(it);
    return {};
}

Status StsService::apply_trust_policy(TrustPolicy policy) {
    std::unique_lock lock(config_mu_);
    if (!providers_.contains(policy.federated_principal)) {
        return Error(Errc::UnknownProvider,
                     "trust policy references unknown provider " +
                         policy.federated_principal);
    }
    policies_[policy.role_name] = std::move(policy);
    return {};
}

Status StsService::apply_pool(WorkloadIdentityPool pool) {
    if (pool.pool_id.empty()) {
        return Error(Errc::ConfigInvalid, "pool needs a pool_id");
    }
    for (const auto& p : pool.providers) {
        if (p.attribute_mapping.find("google.subject") == nullptr) {
            return Error(Errc::ConfigInvalid,
                         "provider " + p.provider_id +
                             " mapping must define google.subject");
        }
        if (!p.attribute_condition) {
            return Error(Errc::ConfigInvalid,
                         "provider " + p.provider_id +
                             " has no parsed attribute_condition");
        }
        size_t same = std::count_if(
            pool.providers.begin(), pool.providers.end(),
            [&](const ProviderConfig& q) {
                return q.provider_id == p.provider_id;
            });
        if (same > 1) {
            return Error(Errc::ConfigInvalid,
                         "duplicate provider id in pool: " + p.provider_id);
        }
    }
    std::unique_lock lock(config_mu_);
    pools_[pool.pool_id] = std::move(pool);
    return {};
}

Result<jwt::JwkSet> StsService::provider_jwks(const std::string& provider_id,
                                              bool force_refresh) {
    std::string uri;
    {
        std::shared_lock lock(config_mu_);
        auto it = providers_.find(provider_id);
        if (it == providers_.end()) {
            return Error(Errc::UnknownProvider,
                         "no provider with id " + provider_id);
        }
        const ProviderState& state = it->second;
        if (state.reg.inline_jwks) return state.cached_jwks;
        const int64_t now = clock_->now();
        bool stale = now - state.fetched_at >= state.reg.jwks_cache_ttl;
        if (!stale && !force_refresh) return state.cached_jwks;
        uri = state.reg.jwks_uri;
    }
    if (!fetcher_) {
        return Error(Errc::JwksUnreachable, "no JWKS fetcher configured");
    }
    auto fetched = fetcher_(uri);
    if (!fetched.ok()) {
        return Error(Errc::JwksUnreachable,
                     "could not refresh JWKS from " + uri);
    }
    std::unique_lock lock(config_mu_);
    auto it = providers_.find(provider_id);
    if (it == providers_.end()) {
        return Error(Errc::UnknownProvider,
                     "provider revoked during JWKS refresh");
    }
    it->second.cached_jwks = fetched.value();
    it->second.fetched_at = clock_->now();
    return std::move(fetched).value();
}

Result<jwt::JwtClaims> StsService::verify_against_provider(
    const jwt::SignedJwt& token, const std::string& provider_id, int64_t now) {
    std::string issuer;
    std::vector<std::string> audiences;
    {
        std::shared_lock lock(config_mu_);
        auto it = providers_.find(provider_id);
        if (it == providers_.end()) {
            return Error(Errc::UnknownProvider,
                         "no provider with id " + provider_id);
        }
        issuer = it->second.reg.issuer;
        audiences = it->second.reg.audiences;
    }

    // Pick the pinned audience present in the token so multi-audience pins
    // work; if none is present the verifier reports AudienceMismatch.
    auto decoded = jwt::decode_unverified(token);
    std::string expected_audience = audiences.front();
    if (decoded.ok()) {
        for (const auto& pinned : audiences) {
            const auto& aud = decoded.value().claims.audience;
            if (std::find(aud.begin(), aud.end(), pinned) != aud.end()) {
                expected_audience = pinned;
                break;
            }
        }
    }

    auto keys = provider_jwks(provider_id, /*force_refresh=*/false);
    if (!keys.ok()) return keys.error();
    auto claims = jwt::verify_jwt(token, keys.value(), issuer,
                                  expected_audience, now, config_.clock_skew);
    if (!claims.ok() && claims.error().code == Errc::UnknownKeyId) {
        // The issuer may have rotated; force one refresh and retry.
        auto fresh = provider_jwks(provider_id, /*force_refresh=*/true);
        if (!fresh.ok()) return fresh.error();
        return jwt::verify_jwt(token, fresh.value(), issuer, expected_audience,
                               now, config_.clock_skew);
    }
    return claims;
}

NativeCredential StsService::issue_credential(const std::string& principal,
                                              std::vector<std::string> scopes,
                                              int64_t expires_at) {
    NativeCredential cred;
    cred.credential_id = "cred-" + id_gen_();
    cred.secret = id_gen_() + id_gen_();
    cred.session_token = id_gen_() + id_gen_();
    cred.expires_at = expires_at;
    cred.scopes = std::move(scopes);
    cred.principal = principal;

    CredentialRecord record;
    record.credential_id = cred.credential_id;
    record.secret_hash = sha256_hex(cred.secret);
    record.session_hash = sha256_hex(cred.session_token);
    record.expires_at = cred.expires_at;
    record.scopes = cred.scopes;
    record.principal = cred.principal;

    std::lock_guard lock(store_mu_);
    credentials_[record.credential_id] = std::move(record);
    return cred;
}

void StsService::audit(const std::string& kind, bool success,
                       const std::string& detail, const std::string& jwt_id) {
    std::lock_guard lock(store_mu_);
    audit_.push_back({kind, success, detail, jwt_id, clock_->now()});
}

Result<NativeCredential> StsService::assume_role_with_web_identity(
    const jwt::SignedJwt& token, const std::string& role_name) {
    const int64_t now = clock_->now();

    auto deny = [&](Error err, const std::string& jwt_id) {
        audit("assume_role", false, "role=" + role_name + " " + err.to_string(),
              jwt_id);
        return err;
    };

    TrustPolicy policy;
    {
        std::shared_lock lock(config_mu_);
        auto it = policies_.find(role_name);
        if (it == policies_.end()) {
            lock.unlock();
            return deny(Error(Errc::UnknownRole, "no role " + role_name), "");
        }
        policy = it->second;
    }

    auto decoded = jwt::decode_unverified(token);
    if (!decoded.ok()) {
        return deny(wrap_error(Errc::VerificationFailed, decoded.error()), "");
    }
    const std::string jwt_id = decoded.value().claims.jwt_id;
    const std::string& issuer = decoded.value().claims.issuer;

    std::string provider_id;
    {
        std::shared_lock lock(config_mu_);
        auto it = issuer_to_provider_.find(issuer);
        if (it == issuer_to_provider_.end()) {
            lock.unlock();
            return deny(Error(Errc::UnknownProvider,
                              "no provider trusts issuer " + issuer),
                        jwt_id);
        }
        provider_id = it->second;
    }

    // The role must name the provider that matched the token's issuer.
    if (policy.federated_principal != provider_id) {
        return deny(Error(Errc::ConditionDenied,
                          "role " + role_name + " does not trust provider " +
                              provider_id),
                    jwt_id);
    }

    auto claims = verify_against_provider(token, provider_id, now);
    if (!claims.ok()) {
        if (claims.error().code == Errc::UnknownProvider ||
            claims.error().code == Errc::JwksUnreachable) {
            return deny(claims.error(), jwt_id);
        }
        return deny(wrap_error(Errc::VerificationFailed, claims.error()),
                    jwt_id);
    }

    if (!cond::eval_string_equals(policy.condition, claims.value())) {
        return deny(Error(Errc::ConditionDenied,
                          "trust policy condition not satisfied for role " +
                              role_name),
                    jwt_id);
    }

    // min(3600, remaining token validity): a nearly-expired identity token
    // cannot be laundered into a full-hour credential.
    const int64_t remaining = claims.value().expires_at - now;
    const int64_t expires_at =
        now + std::min(kMaxCredentialLifetime, remaining);
    auto cred = issue_credential("role/" + role_name, policy.scopes,
                                 expires_at);
    audit("assume_role", true,
          "role=" + role_name + " sub=" + claims.value().subject, jwt_id);
    return cred;
}

Result<FederatedToken> StsService::exchange_federated_token(
    const jwt::SignedJwt& token, const std::string& pool_id,
    const std::string& provider_id) {
    const int64_t now = clock_->now();

    auto deny = [&](Error err, const std::string& jwt_id) {
        audit("token_exchange", false,
              "pool=" + pool_id + " provider=" + provider_id + " " +
                  err.to_string(),
              jwt_id);
        return err;
    };

    ProviderConfig provider;
    {
        std::shared_lock lock(config_mu_);
        auto pit = pools_.find(pool_id);
        if (pit == pools_.end()) {
            lock.unlock();
            return deny(Error(Errc::UnknownProvider, "no pool " + pool_id), "");
        }
        auto cit = std::find_if(pit->second.providers.begin(),
                                pit->second.providers.end(),
                                [&](const ProviderConfig& p) {
                                    return p.provider_id == provider_id;
                                });
        if (cit == pit->second.providers.end()) {
            lock.unlock();
            return deny(Error(Errc::UnknownProvider,
                              "no provider " + provider_id + " in pool " +
                                  pool_id),
                        "");
        }
        provider = *cit;
    }

    auto decoded = jwt::decode_unverified(token);
    if (!decoded.ok()) {
        return deny(wrap_error(Errc::VerificationFailed, decoded.error()), "");
    }
    const std::string jwt_id = decoded.value().claims.jwt_id;
    const std::string& issuer = decoded.value().claims.issuer;

    if (!provider.issuer.empty() && provider.issuer != issuer) {
        return deny(Error(Errc::VerificationFailed,
                          "assertion issuer " + issuer +
                              " not accepted by provider " + provider_id,
                          Errc::IssuerMismatch),
                    jwt_id);
    }

    std::string registration_id;
    {
        std::shared_lock lock(config_mu_);
        auto it = issuer_to_provider_.find(issuer);
        if (it == issuer_to_provider_.end()) {
            lock.unlock();
            return deny(Error(Errc::UnknownProvider,
                              "no registered provider for issuer " + issuer),
                        jwt_id);
        }
        registration_id = it->second;
    }

    auto claims = verify_against_provider(token, registration_id, now);
    if (!claims.ok()) {
        if (claims.error().code == Errc::UnknownProvider ||
            claims.error().code == Errc::JwksUnreachable) {
            return deny(claims.error(), jwt_id);
        }
        return deny(wrap_error(Errc::VerificationFailed, claims.error()),
                    jwt_id);
    }

    auto ctx = cond::AssertionContext::from_claims(claims.value());

    if (!provider.aws_account_id.empty()) {
        const std::string* acct = ctx.find("account_id");
        if (acct == nullptr || *acct != provider.aws_account_id) {
            return deny(Error(Errc::ConditionDenied,
                              "assertion account_id does not match provider"),
                        jwt_id);
        }
    }

    // Fail closed: evaluation errors (missing attribute, type mismatch) are
    // denials, not pass-through.
    auto verdict = cond::eval_condition(provider.attribute_condition, ctx);
    if (!verdict.ok()) {
        return deny(wrap_error(Errc::ConditionDenied, verdict.error()), jwt_id);
    }
    if (!verdict.value()) {
        return deny(Error(Errc::ConditionDenied,
                          "attribute_condition evaluated to false"),
                    jwt_id);
    }

    auto mapped = cond::apply_mapping(provider.attribute_mapping, ctx);
    if (!mapped.ok()) {
        return deny(wrap_error(Errc::MappingFailed, mapped.error()), jwt_id);
    }

    FederatedToken fed;
    fed.token_id = "fed-" + id_gen_();
    fed.value = id_gen_() + id_gen_();
    fed.pool_id = pool_id;
    fed.provider_id = provider_id;
    fed.attributes = std::move(mapped).value();
    const int64_t remaining = claims.value().expires_at - now;
    fed.expires_at = now + std::min(kMaxCredentialLifetime, remaining);

    {
        std::lock_guard lock(store_mu_);
        federated_[sha256_hex(fed.value)] =
            FederatedRecord{fed.token_id, sha256_hex(fed.value), fed.pool_id,
                            fed.provider_id, fed.attributes, fed.expires_at};
    }
    audit("token_exchange", true,
          "pool=" + pool_id + " provider=" + provider_id +
              " subject=" + fed.attributes.at("google.subject"),
          jwt_id);
    return fed;
}

Result<NativeCredential> StsService::impersonate_service_account(
    const std::string& federated_token_value,
    const std::string& target_account) {
    const int64_t now = clock_->now();

    auto deny = [&](Error err) {
        audit("impersonate", false,
              "account=" + target_account + " " + err.to_string(), "");
        return err;
    };

    FederatedRecord record;
    bool found = false;
    {
        std::lock_guard lock(store_mu_);
        auto it = federated_.find(sha256_hex(federated_token_value));
        if (it != federated_.end()) {
            record = it->second;
            found = true;
        }
    }
    if (!found) {
        return deny(Error(Errc::NotAuthorized, "unknown federated token"));
    }
    if (now >= record.expires_at) {
        return deny(Error(Errc::ExpiredFederatedToken,
                          "federated token expired at " +
                              std::to_string(record.expires_at)));
    }

    ProviderConfig provider;
    {
        std::shared_lock lock(config_mu_);
        auto pit = pools_.find(record.pool_id);
        if (pit == pools_.end()) {
            lock.unlock();
            return deny(Error(Errc::NotAuthorized,
                              "pool no longer exists: " + record.pool_id));
        }
        auto cit = std::find_if(pit->second.providers.begin(),
                                pit->second.providers.end(),
                                [&](const ProviderConfig& p) {
                                    return p.provider_id == record.provider_id;
                                });
        if (cit == pit->second.providers.end()) {
            lock.unlock();
            return deny(Error(Errc::NotAuthorized,
                              "provider no longer exists: " +
                                  record.provider_id));
        }
        provider = *cit;
    }

    if (provider.service_account != target_account) {
        return deny(Error(Errc::NotAuthorized,
                          "provider is not linked to account " +
                              target_account));
    }

    // Lifetime never exceeds what remains on the federated token.
    const int64_t expires_at =
        std::min(record.expires_at, now + kMaxCredentialLifetime);
    auto cred = issue_credential("serviceAccount:" + target_account,
                                 provider.scopes, expires_at);
    audit("impersonate", true, "account=" + target_account, "");
    return cred;
}

bool StsService::check_access(const CredentialPresentation& presentation,
                              const std::string& resource_label) {
    const int64_t now = clock_->now();
    bool allow = false;
    std::string detail = "resource=" + resource_label;
    {
        std::lock_guard lock(store_mu_);
        auto it = credentials_.find(presentation.credential_id);
        if (it == credentials_.end()) {
            detail += " unknown credential";
        } else {
            const CredentialRecord& rec = it->second;
            if (!constant_time_equal(sha256_hex(presentation.secret),
                                     rec.secret_hash) ||
                !constant_time_equal(sha256_hex(presentation.session_token),
                                     rec.session_hash)) {
                detail += " bad secret";
            } else if (now >= rec.expires_at) {
                detail += " credential expired";
            } else if (std::find(rec.scopes.begin(), rec.scopes.end(),
                                 resource_label) == rec.scopes.end()) {
                detail += " out of scope";
            } else {
                allow = true;
            }
        }
    }
    audit("resource_check", allow, detail, "");
    return allow;
}

std::vector<StsAuditEntry> StsService::audit_log() const {
    std::lock_guard lock(store_mu_);
    return audit_;
}

size_t StsService::issued_credential_count() const {
    std::lock_guard lock(store_mu_);
    return credentials_.size();
}

bool StsService::has_provider(const std::string& provider_id) const {
    std::shared_lock lock(config_mu_);
    return providers_.contains(provider_id);
}

}  // namespace fedauth::sts
