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

// Admin configuration documents: role trust policies (JSON), workload
// identity pool provider configs (YAML), OIDC provider registrations, and
// workload client configs.

#pragma once

#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "fedauth/error.hpp"
#include "fedauth/sts.hpp"

namespace fedauth::config {

/// Converts a YAML document to JSON (scalars become strings, numbers, bools;
/// maps and sequences recurse).
Result<nlohmann::json> yaml_to_json(const std::string& yaml_text);

/// Trust policy document: a Statement array in the role-trust-policy shape
/// plus Role/Scopes fields naming the role and its granted scope labels.
///
/// {
///   "Role": "pegasus-iam-role",
///   "Scopes": ["s3-pegasus-data"],
///   "Version": "2012-10-17",
///   "Statement": [{
///     "Effect": "Allow",
///     "Principal": {"Federated": "<provider-id or .../oidc-provider/<id>>"},
///     "Action": "sts:AssumeRoleWithWebIdentity",
///     "Condition": {"StringEquals": {"<host>:sub": "...", "<host>:aud": "..."}}
///   }]
/// }
Result<sts::TrustPolicy> parse_trust_policy(const nlohmann::json& doc);

/// Provider config entry in the workload-identity-provider shape:
///
///   - provider_id: "eks-pegasus-provider"
///     issuer: "https://sts.aws.local"        # accepted issuer (optional)
///     aws:
///       account_id: "123456789"              # discriminator (optional)
///     attribute_condition: "assertion.arn.endsWith('...')"
///     attribute_mapping:
///       google.subject: "assertion.arn"
///     service_account: "pegasus-sa@pegasus-gcp-project"
///     scopes: [gcs-pegasus-bucket]
///
/// At least one of issuer / aws.account_id must be present.
Result<sts::ProviderConfig> parse_provider_config(const nlohmann::json& entry);

/// Pool document: {"pool_id": ..., "providers": [entry...]}. A bare list of
/// entries is accepted when a pool id is supplied out of band.
Result<sts::WorkloadIdentityPool> parse_pool(const nlohmann::json& doc,
                                             const std::string& fallback_pool_id = {});

/// Provider registration document:
///   kind: oidc-provider
///   provider_id: gke-pegasus
///   issuer: https://idp.local
///   audiences: [sts.amazonaws.com]
///   jwks_uri: http://127.0.0.1:8801/openid/v1/jwks   # or inline `jwks:`
Result<sts::OidcProviderRegistration> parse_provider_registration(
    const nlohmann::json& doc);

/// What a `trust apply` document turned out to be.
using TrustDocument = std::variant<sts::TrustPolicy, sts::WorkloadIdentityPool,
                                   sts::OidcProviderRegistration>;

/// Classifies and parses an admin document, JSON or YAML.
Result<TrustDocument> parse_trust_document(const std::string& text);

}  // namespace fedauth::config
