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

#include <random>
#include <set>

#include "fedauth/idp.hpp"

using namespace fedauth;
using namespace fedauth::idp;

namespace {

struct Fixture {
    std::shared_ptr<FakeClock> clock = std::make_shared<FakeClock>(1'754'000'000);
    std::shared_ptr<IdpService> service;

    Fixture() {
        IdpConfig config;
        config.issuer = "https://idp.local";
        service = std::make_shared<IdpService>(config, clock,
                                               seeded_id_generator(7));
    }

    PodIdentity pegasus_pod() {
        return service->register_pod({"pegasus", "pegasus-sa"}, "pegasus-0")
            .value();
    }
};

}  // namespace

TEST_CASE("dns label validation") {
    CHECK(is_dns_label("pegasus"));
    CHECK(is_dns_label("pegasus-sa"));
    CHECK(is_dns_label("a"));
    CHECK_FALSE(is_dns_label(""));
    CHECK_FALSE(is_dns_label("Pegasus"));
    CHECK_FALSE(is_dns_label("-pegasus"));
    CHECK_FALSE(is_dns_label("pegasus-"));
    CHECK_FALSE(is_dns_label("under_score"));
    CHECK_FALSE(is_dns_label(std::string(64, 'a')));
    CHECK(is_dns_label(std::string(63, 'a')));
}

TEST_CASE("pod registration") {
    Fixture fx;
    auto pod = fx.service->register_pod({"pegasus", "pegasus-sa"}, "pegasus-0");
    REQUIRE(pod.ok());
    CHECK_FALSE(pod.value().pod_uid.empty());

    SUBCASE("uppercase namespace is rejected") {
        auto bad = fx.service->register_pod({"Pegasus", "pegasus-sa"}, "p");
        REQUIRE_FALSE(bad.ok());
        CHECK(bad.error().code == Errc::InvalidName);
    }

    SUBCASE("same pod name twice gets distinct uids") {
        auto again =
            fx.service->register_pod({"pegasus", "pegasus-sa"}, "pegasus-0");
        REQUIRE(again.ok());
        CHECK(again.value().pod_uid != pod.value().pod_uid);
    }
}

TEST_CASE("bound token carries subject, audience, ttl and binding claims") {
    Fixture fx;
    auto pod = fx.pegasus_pod();
    auto issued = fx.service->issue_bound_token(
        pod.pod_uid, {"sts.amazonaws.com", 3600});
    REQUIRE(issued.ok());

    auto decoded = jwt::decode_unverified(issued.value().token).value();
    const jwt::JwtClaims& claims = decoded.claims;
    CHECK(claims.subject == "system:serviceaccount:pegasus:pegasus-sa");
    CHECK(claims.audience == std::vector<std::string>{"sts.amazonaws.com"});
    CHECK(claims.expires_at - claims.issued_at == 3600);
    CHECK(claims.issuer == "https://idp.local");
    CHECK(claims.extra["kubernetes"]["namespace"] == "pegasus");
    CHECK(claims.extra["kubernetes"]["serviceaccount"] == "pegasus-sa");
    CHECK(claims.extra["kubernetes"]["pod_name"] == "pegasus-0");
    CHECK(claims.extra["kubernetes"]["pod_uid"] == pod.pod_uid);

    // verifies against the served JWKS
    auto verified = jwt::verify_jwt(issued.value().token, fx.service->jwks(),
                                    "https://idp.local", "sts.amazonaws.com",
                                    fx.clock->now() + 1);
    CHECK(verified.ok());
}

TEST_CASE("ttl clamping follows the configured bounds") {
    Fixture fx;
    auto pod = fx.pegasus_pod();

    // requested 10 -> clamped to min_ttl 600
    auto low = fx.service->issue_bound_token(pod.pod_uid, {"aud", 10});
    REQUIRE(low.ok());
    auto low_claims = jwt::decode_unverified(low.value().token).value().claims;
    CHECK(low_claims.expires_at - low_claims.issued_at == 600);

    auto high =
        fx.service->issue_bound_token(pod.pod_uid, {"aud", 1'000'000});
    REQUIRE(high.ok());
    auto high_claims =
        jwt::decode_unverified(high.value().token).value().claims;
    CHECK(high_claims.expires_at - high_claims.issued_at == 86'400);

    CHECK(fx.service->clamp_ttl(600) == 600);
    CHECK(fx.service->clamp_ttl(599) == 600);
    CHECK(fx.service->clamp_ttl(86'401) == 86'400);
    CHECK(fx.service->clamp_ttl(3600) == 3600);
}

TEST_CASE("issue errors: unknown pod, empty audience") {
    Fixture fx;
    auto pod = fx.pegasus_pod();

    auto no_aud = fx.service->issue_bound_token(pod.pod_uid, {"", 3600});
    REQUIRE_FALSE(no_aud.ok());
    CHECK(no_aud.error().code == Errc::AudienceEmpty);

    REQUIRE(fx.service->deregister_pod(pod.pod_uid).ok());
    auto gone = fx.service->issue_bound_token(pod.pod_uid, {"aud", 3600});
    REQUIRE_FALSE(gone.ok());
    CHECK(gone.error().code == Errc::UnknownPod);

    // deregistration does not revoke outstanding tokens
    auto pod2 = fx.pegasus_pod();
    auto issued = fx.service->issue_bound_token(pod2.pod_uid, {"aud", 3600});
    REQUIRE(issued.ok());
    REQUIRE(fx.service->deregister_pod(pod2.pod_uid).ok());
    CHECK(jwt::verify_jwt(issued.value().token, fx.service->jwks(),
                          "https://idp.local", "aud", fx.clock->now() + 1)
              .ok());
}

TEST_CASE("discovery document matches issued tokens") {
    Fixture fx;
    auto doc = fx.service->discovery_document();
    CHECK(doc["issuer"] == "https://idp.local");
    CHECK(doc["jwks_uri"] == "https://idp.local/openid/v1/jwks");

    auto pod = fx.pegasus_pod();
    auto issued = fx.service->issue_bound_token(pod.pod_uid, {"aud", 3600});
    auto claims = jwt::decode_unverified(issued.value().token).value().claims;
    CHECK(claims.issuer == doc["issuer"]);
}

TEST_CASE("served JWKS covers rotation overlap and stays public-only") {
    Fixture fx;
    auto pod = fx.pegasus_pod();
    auto before = fx.service->issue_bound_token(pod.pod_uid, {"aud", 3600});
    REQUIRE(before.ok());

    fx.service->rotate_key();
    CHECK(fx.service->jwks().keys.size() == 2);

    // pre-rotation token verifies against the served set
    CHECK(jwt::verify_jwt(before.value().token, fx.service->jwks(),
                          "https://idp.local", "aud", fx.clock->now() + 1)
              .ok());

    std::string serialized = fx.service->jwks().to_json().dump();
    for (const char* field : {"\"d\"", "\"p\"", "\"q\"", "\"dp\"", "\"dq\"",
                              "\"qi\"", "\"k\""}) {
        CHECK(serialized.find(field) == std::string::npos);
    }
}

TEST_CASE("audit log records every successful issuance") {
    Fixture fx;
    auto pod = fx.pegasus_pod();
    std::set<std::string> jwt_ids;
    for (int i = 0; i < 10; ++i) {
        auto issued = fx.service->issue_bound_token(pod.pod_uid, {"aud", 3600});
        REQUIRE(issued.ok());
        auto claims =
            jwt::decode_unverified(issued.value().token).value().claims;
        jwt_ids.insert(claims.jwt_id);
    }
    // a failed issuance is not audited
    (void)fx.service->issue_bound_token("bogus-uid", {"aud", 3600});

    auto audit = fx.service->audit_log();
    CHECK(audit.size() == 10);
    CHECK(jwt_ids.size() == 10);
    for (const auto& entry : audit) {
        CHECK(jwt_ids.contains(entry.jwt_id));
        CHECK(entry.pod_uid == pod.pod_uid);
        CHECK(entry.expires_at - entry.issued_at <= 86'400);
    }
}

TEST_CASE("projected token carries the mount path label") {
    Fixture fx;
    auto pod = fx.pegasus_pod();
    auto projected =
        fx.service->project_token(pod.pod_uid, {"sts.amazonaws.com", 3600});
    REQUIRE(projected.ok());
    CHECK(projected.value().mount_path == "/var/run/secrets/tokens/token");
    CHECK_FALSE(projected.value().token.compact.empty());
}

TEST_CASE("ttl ceiling invariant across random requests") {
    Fixture fx;
    auto pod = fx.pegasus_pod();
    std::mt19937_64 rng(99);
    for (int i = 0; i < 200; ++i) {
        int64_t requested = static_cast<int64_t>(rng() % 200'000) - 50'000;
        auto issued = fx.service->issue_bound_token(pod.pod_uid,
                                                    {"aud", requested});
        REQUIRE(issued.ok());
        auto claims =
            jwt::decode_unverified(issued.value().token).value().claims;
        CHECK(claims.expires_at - claims.issued_at <= 86'400);
        CHECK(claims.expires_at - claims.issued_at >= 600);
    }
}
