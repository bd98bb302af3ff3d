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

#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>

#include "fedauth/idp.hpp"
#include "fedauth/sts.hpp"
#include "fedauth/trust_config.hpp"

using namespace fedauth;
using nlohmann::json;

namespace {

// IdP wired to an STS through a counting JWKS fetcher, plus the standard
// pegasus trust configuration.
struct Fixture {
    std::shared_ptr<FakeClock> clock = std::make_shared<FakeClock>(1'754'000'000);
    std::shared_ptr<idp::IdpService> source;
    std::shared_ptr<sts::StsService> service;
    idp::PodIdentity pod;
    int fetch_count = 0;

    explicit Fixture(bool with_policy = true) {
        idp::IdpConfig idp_config;
        idp_config.issuer = "https://idp.local";
        source = std::make_shared<idp::IdpService>(idp_config, clock,
                                                   seeded_id_generator(11));
        auto* self = this;
        service = std::make_shared<sts::StsService>(
            sts::StsConfig{}, clock,
            [self](const std::string& uri) -> Result<jwt::JwkSet> {
                ++self->fetch_count;
                if (uri == "https://idp.local/openid/v1/jwks") {
                    return self->source->jwks();
                }
                return Error(Errc::JwksUnreachable, "no such issuer");
            },
            seeded_id_generator(12));

        pod = source->register_pod({"pegasus", "pegasus-sa"}, "pegasus-0")
                  .value();

        sts::OidcProviderRegistration reg;
        reg.provider_id = "gke-pegasus-provider";
        reg.issuer = "https://idp.local";
        reg.audiences = {"sts.amazonaws.com"};
        reg.jwks_uri = "https://idp.local/openid/v1/jwks";
        REQUIRE(service->register_provider(reg).ok());

        if (with_policy) {
            sts::TrustPolicy policy;
            policy.role_name = "pegasus-iam-role";
            policy.federated_principal = "gke-pegasus-provider";
            policy.condition.required["idp.local:sub"] =
                "system:serviceaccount:pegasus:pegasus-sa";
            policy.condition.required["idp.local:aud"] = "sts.amazonaws.com";
            policy.scopes = {"s3-pegasus-data"};
            REQUIRE(service->apply_trust_policy(policy).ok());
        }
    }

    jwt::SignedJwt token(const std::string& audience = "sts.amazonaws.com",
                         int64_t ttl = 3600) {
        return source->issue_bound_token(pod.pod_uid, {audience, ttl})
            .value()
            .token;
    }

    void apply_pegasus_pool() {
        const char* yaml = R"yaml(
pool_id: pegasus-pool
providers:
  - provider_id: eks-pegasus-provider
    issuer: "https://idp.local"
    attribute_condition: "assertion.sub.endsWith(':pegasus-sa')"
    attribute_mapping:
      google.subject: "assertion.sub"
    service_account: "pegasus-sa@pegasus-gcp-project"
    scopes: [gcs-pegasus-bucket]
)yaml";
        auto doc = config::yaml_to_json(yaml);
        REQUIRE(doc.ok());
        auto pool = config::parse_pool(doc.value());
        REQUIRE(pool.ok());
        REQUIRE(service->apply_pool(std::move(pool).value()).ok());
    }
};

}  // namespace

TEST_CASE("provider registration enforces issuer uniqueness") {
    Fixture fx;
    sts::OidcProviderRegistration dup;
    dup.provider_id = "second";
    dup.issuer = "https://idp.local";
    dup.audiences = {"x"};
    dup.jwks_uri = "https://idp.local/openid/v1/jwks";
    auto second = fx.service->register_provider(dup);
    REQUIRE_FALSE(second.ok());
    CHECK(second.error().code == Errc::DuplicateIssuer);

    sts::OidcProviderRegistration unreachable;
    unreachable.provider_id = "nowhere";
    unreachable.issuer = "https://nowhere.local";
    unreachable.audiences = {"x"};
    unreachable.jwks_uri = "https://nowhere.local/jwks";
    auto failed = fx.service->register_provider(unreachable);
    REQUIRE_FALSE(failed.ok());
    CHECK(failed.error().code == Errc::JwksUnreachable);

    // inline JWKS needs no fetcher round-trip
    sts::OidcProviderRegistration inline_reg;
    inline_reg.provider_id = "inline";
    inline_reg.issuer = "https://inline.local";
    inline_reg.audiences = {"x"};
    inline_reg.inline_jwks = fx.source->jwks();
    CHECK(fx.service->register_provider(inline_reg).ok());
}

TEST_CASE("assume-role happy path issues a scoped short credential") {
    Fixture fx;
    auto cred =
        fx.service->assume_role_with_web_identity(fx.token(), "pegasus-iam-role");
    REQUIRE(cred.ok());
    CHECK(cred.value().expires_at - fx.clock->now() == 3600);
    CHECK(cred.value().scopes == std::vector<std::string>{"s3-pegasus-data"});
    CHECK(cred.value().principal == "role/pegasus-iam-role");
    CHECK_FALSE(cred.value().secret.empty());

    SUBCASE("credential lifetime is capped by remaining token validity") {
        fx.clock->advance(3000);  // 600 s of token validity left
        auto short_cred = fx.service->assume_role_with_web_identity(
            fx.token("sts.amazonaws.com", 600), "pegasus-iam-role");
        REQUIRE(short_cred.ok());
        CHECK(short_cred.value().expires_at - fx.clock->now() == 600);
    }
}

TEST_CASE("assume-role denial paths never issue credentials") {
    Fixture fx;
    const size_t before = fx.service->issued_credential_count();

    SUBCASE("unknown role") {
        auto r = fx.service->assume_role_with_web_identity(fx.token(), "nope");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().code == Errc::UnknownRole);
    }
    SUBCASE("condition mismatch on subject") {
        sts::TrustPolicy other;
        other.role_name = "other-role";
        other.federated_principal = "gke-pegasus-provider";
        other.condition.required["idp.local:sub"] =
            "system:serviceaccount:other:other-sa";
        REQUIRE(fx.service->apply_trust_policy(other).ok());
        auto r = fx.service->assume_role_with_web_identity(fx.token(),
                                                           "other-role");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().code == Errc::ConditionDenied);
    }
    SUBCASE("audience mismatch is a verification failure with cause") {
        auto r = fx.service->assume_role_with_web_identity(
            fx.token("storage.googleapis.com"), "pegasus-iam-role");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().code == Errc::VerificationFailed);
        CHECK(r.error().cause == Errc::AudienceMismatch);
    }
    SUBCASE("expired token") {
        auto old_token = fx.token();
        fx.clock->advance(3600 + 31);
        auto r = fx.service->assume_role_with_web_identity(old_token,
                                                           "pegasus-iam-role");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().code == Errc::VerificationFailed);
        CHECK(r.error().cause == Errc::Expired);
    }
    SUBCASE("unknown issuer") {
        idp::IdpConfig other;
        other.issuer = "https://stranger.local";
        idp::IdpService stranger(other, fx.clock, seeded_id_generator(5));
        auto spod =
            stranger.register_pod({"pegasus", "pegasus-sa"}, "x").value();
        auto stoken = stranger
                          .issue_bound_token(spod.pod_uid,
                                             {"sts.amazonaws.com", 3600})
                          .value()
                          .token;
        auto r = fx.service->assume_role_with_web_identity(stoken,
                                                           "pegasus-iam-role");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().code == Errc::UnknownProvider);
    }
    SUBCASE("garbage token") {
        auto r = fx.service->assume_role_with_web_identity(
            jwt::SignedJwt{"not-a-token"}, "pegasus-iam-role");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().code == Errc::VerificationFailed);
        CHECK(r.error().cause == Errc::Malformed);
    }
    SUBCASE("role trusting a different provider") {
        sts::OidcProviderRegistration reg;
        reg.provider_id = "unrelated";
        reg.issuer = "https://unrelated.local";
        reg.audiences = {"x"};
        reg.inline_jwks = fx.source->jwks();
        REQUIRE(fx.service->register_provider(reg).ok());
        sts::TrustPolicy policy;
        policy.role_name = "unrelated-role";
        policy.federated_principal = "unrelated";
        REQUIRE(fx.service->apply_trust_policy(policy).ok());
        auto r = fx.service->assume_role_with_web_identity(fx.token(),
                                                           "unrelated-role");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().code == Errc::ConditionDenied);
    }

    // fail-closed across every branch above
    CHECK(fx.service->issued_credential_count() == before);
}

TEST_CASE("revocation kills new exchanges, not outstanding credentials") {
    Fixture fx;
    auto cred = fx.service
                    ->assume_role_with_web_identity(fx.token(),
                                                    "pegasus-iam-role")
                    .value();

    REQUIRE(fx.service->revoke_provider("gke-pegasus-provider").ok());

    auto denied = fx.service->assume_role_with_web_identity(
        fx.token(), "pegasus-iam-role");
    REQUIRE_FALSE(denied.ok());
    CHECK(denied.error().code == Errc::UnknownProvider);

    // outstanding credential works until its recorded expiry
    sts::CredentialPresentation presentation{
        cred.credential_id, cred.secret, cred.session_token};
    CHECK(fx.service->check_access(presentation, "s3-pegasus-data"));
    fx.clock->set(cred.expires_at - 1);
    CHECK(fx.service->check_access(presentation, "s3-pegasus-data"));
    fx.clock->set(cred.expires_at);
    CHECK_FALSE(fx.service->check_access(presentation, "s3-pegasus-data"));

    auto again = fx.service->revoke_provider("gke-pegasus-provider");
    REQUIRE_FALSE(again.ok());
    CHECK(again.error().code == Errc::UnknownProvider);
}

TEST_CASE("pool exchange maps the asserted identity") {
    Fixture fx;
    fx.apply_pegasus_pool();

    auto fed = fx.service->exchange_federated_token(
        fx.token(), "pegasus-pool", "eks-pegasus-provider");
    REQUIRE(fed.ok());
    CHECK(fed.value().attributes.at("google.subject") ==
          "system:serviceaccount:pegasus:pegasus-sa");
    CHECK(fed.value().expires_at - fx.clock->now() <= 3600);

    SUBCASE("impersonation of the linked account") {
        auto cred = fx.service->impersonate_service_account(
            fed.value().value, "pegasus-sa@pegasus-gcp-project");
        REQUIRE(cred.ok());
        CHECK(cred.value().principal ==
              "serviceAccount:pegasus-sa@pegasus-gcp-project");
        CHECK(cred.value().expires_at <= fed.value().expires_at);
        CHECK(cred.value().scopes ==
              std::vector<std::string>{"gcs-pegasus-bucket"});
    }
    SUBCASE("impersonation of an unlinked account") {
        auto cred = fx.service->impersonate_service_account(
            fed.value().value, "someone-else@pegasus-gcp-project");
        REQUIRE_FALSE(cred.ok());
        CHECK(cred.error().code == Errc::NotAuthorized);
    }
    SUBCASE("expired federated token") {
        fx.clock->set(fed.value().expires_at);
        auto cred = fx.service->impersonate_service_account(
            fed.value().value, "pegasus-sa@pegasus-gcp-project");
        REQUIRE_FALSE(cred.ok());
        CHECK(cred.error().code == Errc::ExpiredFederatedToken);
    }
    SUBCASE("unknown federated token value") {
        auto cred = fx.service->impersonate_service_account(
            "fabricated-value", "pegasus-sa@pegasus-gcp-project");
        REQUIRE_FALSE(cred.ok());
        CHECK(cred.error().code == Errc::NotAuthorized);
    }
}

TEST_CASE("pool exchange denial paths") {
    Fixture fx;
    fx.apply_pegasus_pool();
    const size_t before = fx.service->issued_credential_count();

    SUBCASE("unknown pool / provider") {
        auto r1 = fx.service->exchange_federated_token(fx.token(), "nope",
                                                       "eks-pegasus-provider");
        CHECK(r1.error().code == Errc::UnknownProvider);
        auto r2 = fx.service->exchange_federated_token(fx.token(),
                                                       "pegasus-pool", "nope");
        CHECK(r2.error().code == Errc::UnknownProvider);
    }
    SUBCASE("condition false") {
        auto other_pod =
            fx.source->register_pod({"other", "other-sa"}, "other-0").value();
        auto other_token =
            fx.source
                ->issue_bound_token(other_pod.pod_uid,
                                    {"sts.amazonaws.com", 3600})
                .value()
                .token;
        auto r = fx.service->exchange_federated_token(
            other_token, "pegasus-pool", "eks-pegasus-provider");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().code == Errc::ConditionDenied);
    }
    SUBCASE("condition referencing a missing attribute fails closed") {
        const char* yaml = R"yaml(
pool_id: strict-pool
providers:
  - provider_id: strict
    issuer: "https://idp.local"
    attribute_condition: "assertion.arn.endsWith('x')"
    attribute_mapping: {google.subject: "assertion.sub"}
)yaml";
        auto pool = config::parse_pool(config::yaml_to_json(yaml).value());
        REQUIRE(pool.ok());
        REQUIRE(fx.service->apply_pool(std::move(pool).value()).ok());
        auto r = fx.service->exchange_federated_token(fx.token(), "strict-pool",
                                                      "strict");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().code == Errc::ConditionDenied);
        CHECK(r.error().cause == Errc::MissingAttribute);
    }
    SUBCASE("mapping referencing a missing attribute") {
        const char* yaml = R"yaml(
pool_id: broken-pool
providers:
  - provider_id: broken
    issuer: "https://idp.local"
    attribute_condition: "assertion.sub.endsWith('pegasus-sa')"
    attribute_mapping:
      google.subject: "assertion.sub"
      extra.attribute: "assertion.arn"
)yaml";
        auto pool = config::parse_pool(config::yaml_to_json(yaml).value());
        REQUIRE(pool.ok());
        REQUIRE(fx.service->apply_pool(std::move(pool).value()).ok());
        auto r = fx.service->exchange_federated_token(fx.token(), "broken-pool",
                                                      "broken");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().code == Errc::MappingFailed);
    }
    SUBCASE("account discriminator mismatch") {
        const char* yaml = R"yaml(
pool_id: acct-pool
providers:
  - provider_id: acct
    issuer: "https://idp.local"
    aws: {account_id: "123456789"}
    attribute_condition: "assertion.sub.endsWith('pegasus-sa')"
    attribute_mapping: {google.subject: "assertion.sub"}
)yaml";
        auto pool = config::parse_pool(config::yaml_to_json(yaml).value());
        REQUIRE(pool.ok());
        REQUIRE(fx.service->apply_pool(std::move(pool).value()).ok());
        auto r = fx.service->exchange_federated_token(fx.token(), "acct-pool",
                                                      "acct");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().code == Errc::ConditionDenied);
    }

    CHECK(fx.service->issued_credential_count() == before);
}

TEST_CASE("check_access rejects random presentations") {
    Fixture fx;
    auto cred = fx.service
                    ->assume_role_with_web_identity(fx.token(),
                                                    "pegasus-iam-role")
                    .value();
    std::mt19937_64 rng(31337);
    auto random_string = [&rng](size_t n) {
        std::string s;
        for (size_t i = 0; i < n; ++i) {
            s.push_back("abcdef0123456789"[rng() % 16]);
        }
        return s;
    };
    int allows = 0;
    for (int i = 0; i < 10'000; ++i) {
        sts::CredentialPresentation presentation{
            i % 3 == 0 ? cred.credential_id : random_string(16),
            random_string(32), random_string(32)};
        if (fx.service->check_access(presentation, "s3-pegasus-data")) {
            ++allows;
        }
    }
    CHECK(allows == 0);

    // and the real credential still works
    CHECK(fx.service->check_access(
        {cred.credential_id, cred.secret, cred.session_token},
        "s3-pegasus-data"));
    // but not out of scope
    CHECK_FALSE(fx.service->check_access(
        {cred.credential_id, cred.secret, cred.session_token},
        "another-bucket"));
}

TEST_CASE("stale JWKS cache recovers via forced refresh on unknown kid") {
    Fixture fx;
    int fetches_after_setup = fx.fetch_count;

    // the cached set predates this rotation, so the next token's kid is
    // unknown to the cache until the forced refresh
    fx.source->rotate_key();
    auto fresh_token = fx.token();
    auto cred = fx.service->assume_role_with_web_identity(fresh_token,
                                                          "pegasus-iam-role");
    REQUIRE(cred.ok());
    CHECK(fx.fetch_count > fetches_after_setup);
}

TEST_CASE("audit log covers every exchange attempt") {
    Fixture fx;
    fx.apply_pegasus_pool();
    size_t attempts = 0;

    (void)fx.service->assume_role_with_web_identity(fx.token(),
                                                    "pegasus-iam-role");
    ++attempts;
    (void)fx.service->assume_role_with_web_identity(fx.token(), "ghost-role");
    ++attempts;
    (void)fx.service->assume_role_with_web_identity(
        fx.token("storage.googleapis.com"), "pegasus-iam-role");
    ++attempts;
    (void)fx.service->exchange_federated_token(fx.token(), "pegasus-pool",
                                               "eks-pegasus-provider");
    ++attempts;
    (void)fx.service->exchange_federated_token(fx.token(), "ghost-pool", "x");
    ++attempts;
    (void)fx.service->impersonate_service_account("bogus", "any");
    ++attempts;

    size_t exchange_entries = 0;
    for (const auto& entry : fx.service->audit_log()) {
        if (entry.kind != "resource_check") ++exchange_entries;
    }
    CHECK(exchange_entries == attempts);

    // successful exchanges audit the token's jwt_id
    bool found_jwt_id = false;
    for (const auto& entry : fx.service->audit_log()) {
        if (entry.kind == "assume_role" && entry.success) {
            found_jwt_id = !entry.jwt_id.empty();
        }
    }
    CHECK(found_jwt_id);
}

TEST_CASE("exchanges see pre- or post-mutation config, never a mix") {
    Fixture fx;
    std::atomic<bool> done{false};
    std::atomic<int> attempts{0};
    std::atomic<int> other{0};

    std::thread worker([&] {
        while (!done.load()) {
            auto r = fx.service->assume_role_with_web_identity(
                fx.token(), "pegasus-iam-role");
            if (!r.ok() && r.error().code != Errc::UnknownProvider) ++other;
            ++attempts;
        }
    });

    // keep flipping the provider until the worker has seen plenty of both
    // worlds; bounded so a stuck worker cannot hang the suite
    for (int i = 0; i < 200'000 && attempts.load() < 50; ++i) {
        (void)fx.service->revoke_provider("gke-pegasus-provider");
        sts::OidcProviderRegistration reg;
        reg.provider_id = "gke-pegasus-provider";
        reg.issuer = "https://idp.local";
        reg.audiences = {"sts.amazonaws.com"};
        reg.jwks_uri = "https://idp.local/openid/v1/jwks";
        (void)fx.service->register_provider(reg);
        std::this_thread::yield();
    }
    done.store(true);
    worker.join();

    // a mixed view would surface as some third outcome
    CHECK(other.load() == 0);
    CHECK(attempts.load() > 0);
}

TEST_CASE("issued credential lifetimes never exceed the ceiling") {
    Fixture fx;
    fx.apply_pegasus_pool();
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 100; ++i) {
        int64_t ttl = 600 + static_cast<int64_t>(rng() % 86'000);
        auto cred = fx.service->assume_role_with_web_identity(
            fx.token("sts.amazonaws.com", ttl), "pegasus-iam-role");
        REQUIRE(cred.ok());
        CHECK(cred.value().expires_at - fx.clock->now() <=
              sts::kMaxCredentialLifetime);
        fx.clock->advance(static_cast<int64_t>(rng() % 50));
    }
}
