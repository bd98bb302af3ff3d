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

#include "fedauth/trust_config.hpp"

using namespace fedauth;
using nlohmann::json;

namespace {

const char* kTrustPolicyJson = R"yaml({
    "Role": "pegasus-iam-role",
    "Scopes": ["s3-pegasus-data"],
    "Version": "2012-10-17",
    "Statement": [{
        "Effect": "Allow",
        "Principal": {
            "Federated": "arn:aws:iam::123456789:oidc-provider/container.googleapis.com/gke-pegasus"
        },
        "Action": "sts:AssumeRoleWithWebIdentity",
        "Condition": {
            "StringEquals": {
                "container.googleapis.com/gke-pegasus:sub": "system:serviceaccount:pegasus:pegasus-sa",
                "container.googleapis.com/gke-pegasus:aud": "sts.amazonaws.com"
            }
        }
    }]
})yaml";

const char* kProviderYaml = R"yaml(
- provider_id: "eks-pegasus-provider"
  aws:
    account_id: "123456789"
  attribute_condition: "assertion.arn.endsWith(':assumed-role/pegasus-iam-role/pegasus-sa')"
  attribute_mapping:
    google.subject: "assertion.arn"
  service_account: "pegasus-sa@pegasus-gcp-project"
)yaml";

}  // namespace

TEST_CASE("parses the role trust policy document") {
    json doc = json::parse(kTrustPolicyJson);
    auto policy = config::parse_trust_policy(doc);
    REQUIRE(policy.ok());
    CHECK(policy.value().role_name == "pegasus-iam-role");
    CHECK(policy.value().federated_principal ==
          "container.googleapis.com/gke-pegasus");
    CHECK(policy.value().scopes ==
          std::vector<std::string>{"s3-pegasus-data"});
    CHECK(policy.value().condition.required.at(
              "container.googleapis.com/gke-pegasus:sub") ==
          "system:serviceaccount:pegasus:pegasus-sa");
    CHECK(policy.value().condition.required.size() == 2);

    SUBCASE("action other than role assumption is rejected") {
        doc["Statement"][0]["Action"] = "sts:GetSessionToken";
        CHECK_FALSE(config::parse_trust_policy(doc).ok());
    }
    SUBCASE("deny statements are rejected") {
        doc["Statement"][0]["Effect"] = "Deny";
        CHECK_FALSE(config::parse_trust_policy(doc).ok());
    }
    SUBCASE("only StringEquals is supported") {
        doc["Statement"][0]["Condition"] = {
            {"StringLike", {{"sub", "*"}}}};
        CHECK_FALSE(config::parse_trust_policy(doc).ok());
    }
}

TEST_CASE("parses the provider config list as a pool") {
    auto converted = config::yaml_to_json(kProviderYaml);
    REQUIRE(converted.ok());
    auto pool = config::parse_pool(converted.value(), "pegasus-pool");
    REQUIRE(pool.ok());
    REQUIRE(pool.value().providers.size() == 1);
    const auto& provider = pool.value().providers.front();
    CHECK(provider.provider_id == "eks-pegasus-provider");
    CHECK(provider.aws_account_id == "123456789");
    CHECK(provider.service_account == "pegasus-sa@pegasus-gcp-project");
    CHECK(provider.attribute_mapping.find("google.subject") != nullptr);
    CHECK(provider.condition_source ==
          "assertion.arn.endsWith(':assumed-role/pegasus-iam-role/pegasus-sa')");
}

TEST_CASE("provider config validation") {
    auto parse = [](const std::string& yaml) {
        auto doc = config::yaml_to_json(yaml);
        REQUIRE(doc.ok());
        return config::parse_provider_config(doc.value());
    };

    SUBCASE("mapping must define google.subject") {
        auto r = parse(R"yaml(
provider_id: p
issuer: "https://x"
attribute_condition: "assertion.a == 'b'"
attribute_mapping: {other.name: "assertion.a"}
)yaml");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().code == Errc::ConfigInvalid);
    }
    SUBCASE("condition must parse") {
        auto r = parse(R"yaml(
provider_id: p
issuer: "https://x"
attribute_condition: "assertion.a =="
attribute_mapping: {google.subject: "assertion.a"}
)yaml");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().message.find("parse") != std::string::npos);
    }
    SUBCASE("mapping values limited to paths and literals") {
        auto r = parse(R"yaml(
provider_id: p
issuer: "https://x"
attribute_condition: "assertion.a == 'b'"
attribute_mapping: {google.subject: "assertion.a == 'b'"}
)yaml");
        REQUIRE_FALSE(r.ok());
    }
    SUBCASE("needs issuer or account discriminator") {
        auto r = parse(R"yaml(
provider_id: p
attribute_condition: "assertion.a == 'b'"
attribute_mapping: {google.subject: "assertion.a"}
)yaml");
        REQUIRE_FALSE(r.ok());
    }
}

TEST_CASE("document classification") {
    auto policy = config::parse_trust_document(kTrustPolicyJson);
    REQUIRE(policy.ok());
    CHECK(std::holds_alternative<sts::TrustPolicy>(policy.value()));

    auto pool = config::parse_trust_document(R"yaml(
pool_id: pegasus-pool
providers:
  - provider_id: p1
    issuer: "https://x"
    attribute_condition: "assertion.a == 'b'"
    attribute_mapping: {google.subject: "assertion.a"}
)yaml");
    REQUIRE(pool.ok());
    CHECK(std::holds_alternative<sts::WorkloadIdentityPool>(pool.value()));

    auto registration = config::parse_trust_document(R"yaml(
kind: oidc-provider
provider_id: gke-pegasus
issuer: https://idp.local
audiences: [sts.amazonaws.com]
jwks_uri: http://127.0.0.1:8801/openid/v1/jwks
)yaml");
    REQUIRE(registration.ok());
    CHECK(std::holds_alternative<sts::OidcProviderRegistration>(
        registration.value()));

    CHECK_FALSE(config::parse_trust_document("just a string").ok());
}

TEST_CASE("yaml scalar conversion keeps account ids as strings") {
    auto doc = config::yaml_to_json(R"yaml(
quoted: "123456789"
number: 42
flag: true
text: hello
float: 1.5
)yaml");
    REQUIRE(doc.ok());
    CHECK(doc.value()["quoted"].is_string());
    CHECK(doc.value()["number"] == 42);
    CHECK(doc.value()["flag"] == true);
    CHECK(doc.value()["text"] == "hello");
    CHECK(doc.value()["float"] == 1.5);
}
