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

#include "fedauth/trust_config.hpp"

#include <yaml-cpp/yaml.h>

namespace fedauth::config {

using nlohmann::json;

namespace {

json yaml_node_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
            return nullptr;
        case YAML::NodeType::Scalar: {
            // Resolve plain scalars by tag-less sniffing; quoted scalars stay
            // strings.
            if (node.Tag() == "!") return node.as<std::string>();
            bool b;
            if (YAML::convert<bool>::decode(node, b) &&
                (node.Scalar() == "true" || node.Scalar() == "false")) {
                return b;
            }
            int64_t i;
            if (YAML::convert<int64_t>::decode(node, i)) {
                // Leading zeros or '+' stay strings (account ids, dates).
                const std::string& s = node.Scalar();
                if (std::to_string(i) == s) return i;
            }
            double d;
            if (YAML::convert<double>::decode(node, d) &&
                node.Scalar().find_first_not_of("0123456789+-.eE") ==
                    std::string::npos &&
                node.Scalar().find('.') != std::string::npos) {
                return d;
            }
            return node.as<std::string>();
        }
        case YAML::NodeType::Sequence: {
            json arr = json::array();
            for (const auto& item : node) arr.push_back(yaml_node_to_json(item));
            return arr;
        }
        case YAML::NodeType::Map: {
            json obj = json::object();
            for (const auto& kv : node) {
                obj[kv.first.as<std::string>()] = yaml_node_to_json(kv.second);
            }
            return obj;
        }
        default:
            return nullptr;
    }
}

Result<std::vector<std::string>> string_list(const json& node,
                                             const std::string& what) {
    std::vector<std::string> out;
    if (!node.is_array()) {
        return Error(Errc::ConfigInvalid, what + " must be a list of strings");
    }
    for (const auto& item : node) {
        if (!item.is_string()) {
            return Error(Errc::ConfigInvalid,
                         what + " must be a list of strings");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

// "arn:aws:iam::123:oidc-provider/<id>" → "<id>"; anything else verbatim.
std::string principal_to_provider_id(const std::string& principal) {
    const std::string marker = "oidc-provider/";
    auto pos = principal.find(marker);
    if (pos == std::string::npos) return principal;
    return principal.substr(pos + marker.size());
}

}  // namespace

Result<json> yaml_to_json(const std::string& yaml_text) {
    try {
        YAML::Node root = YAML::Load(yaml_text);
        return yaml_node_to_json(root);
    } catch (const YAML::Exception& e) {
        return Error(Errc::ConfigInvalid,
                     std::string("YAML parse error: ") + e.what());
    }
}

Result<sts::TrustPolicy> parse_trust_policy(const json& doc) {
    if (!doc.is_object()) {
        return Error(Errc::ConfigInvalid, "trust policy must be an object");
    }
    sts::TrustPolicy policy;
    if (!doc.contains("Role") || !doc["Role"].is_string()) {
        return Error(Errc::ConfigInvalid, "trust policy needs a Role name");
    }
    policy.role_name = doc["Role"].get<std::string>();
    if (doc.contains("Scopes")) {
        auto scopes = string_list(doc["Scopes"], "Scopes");
        if (!scopes.ok()) return scopes.error();
        policy.scopes = std::move(scopes).value();
    }

    if (!doc.contains("Statement") || !doc["Statement"].is_array() ||
        doc["Statement"].size() != 1) {
        return Error(Errc::ConfigInvalid,
                     "trust policy needs exactly one Statement");
    }
    const json& stmt = doc["Statement"][0];
    if (stmt.value("Effect", "") != "Allow") {
        return Error(Errc::ConfigInvalid, "Statement Effect must be Allow");
    }
    if (stmt.value("Action", "") != sts::TrustPolicy::kAction) {
        return Error(Errc::ConfigInvalid,
                     std::string("Statement Action must be ") +
                         sts::TrustPolicy::kAction);
    }
    if (!stmt.contains("Principal") || !stmt["Principal"].is_object() ||
        !stmt["Principal"].contains("Federated") ||
        !stmt["Principal"]["Federated"].is_string()) {
        return Error(Errc::ConfigInvalid,
                     "Statement needs Principal.Federated");
    }
    policy.federated_principal = principal_to_provider_id(
        stmt["Principal"]["Federated"].get<std::string>());

    if (stmt.contains("Condition")) {
        const json& condition = stmt["Condition"];
        if (!condition.is_object()) {
            return Error(Errc::ConfigInvalid, "Condition must be an object");
        }
        for (const auto& [op, block] : condition.items()) {
            if (op != "StringEquals") {
                return Error(Errc::ConfigInvalid,
                             "only StringEquals conditions are supported, got " +
                                 op);
            }
            if (!block.is_object()) {
                return Error(Errc::ConfigInvalid,
                             "StringEquals must be an object");
            }
            for (const auto& [key, value] : block.items()) {
                if (!value.is_string()) {
                    return Error(Errc::ConfigInvalid,
                                 "StringEquals values must be strings");
                }
                if (policy.condition.required.contains(key)) {
                    return Error(Errc::ConfigInvalid,
                                 "duplicate StringEquals key " + key);
                }
                policy.condition.required[key] = value.get<std::string>();
            }
        }
    }
    return policy;
}

Result<sts::ProviderConfig> parse_provider_config(const json& entry) {
    if (!entry.is_object()) {
        return Error(Errc::ConfigInvalid, "provider entry must be an object");
    }
    sts::ProviderConfig provider;
    provider.provider_id = entry.value("provider_id", "");
    if (provider.provider_id.empty()) {
        return Error(Errc::ConfigInvalid, "provider entry needs provider_id");
    }
    provider.issuer = entry.value("issuer", "");
    if (entry.contains("aws") && entry["aws"].is_object()) {
        const json& aws = entry["aws"];
        if (aws.contains("account_id")) {
            const json& acct = aws["account_id"];
            provider.aws_account_id =
                acct.is_string() ? acct.get<std::string>() : acct.dump();
        }
    }
    if (provider.issuer.empty() && provider.aws_account_id.empty()) {
        return Error(Errc::ConfigInvalid,
                     "provider " + provider.provider_id +
                         " needs an issuer or aws.account_id");
    }

    const std::string source = entry.value("attribute_condition", "");
    if (source.empty()) {
        return Error(Errc::ConfigInvalid,
                     "provider " + provider.provider_id +
                         " needs an attribute_condition");
    }
    auto parsed = cond::parse_condition(source);
    if (!parsed.ok()) {
        return Error(Errc::ConfigInvalid,
                     "attribute_condition does not parse: " +
                         parsed.error().message);
    }
    provider.condition_source = source;
    provider.attribute_condition = std::move(parsed).value();

    if (!entry.contains("attribute_mapping") ||
        !entry["attribute_mapping"].is_object()) {
        return Error(Errc::ConfigInvalid,
                     "provider " + provider.provider_id +
                         " needs an attribute_mapping");
    }
    for (const auto& [target, source_expr] : entry["attribute_mapping"].items()) {
        if (!source_expr.is_string()) {
            return Error(Errc::ConfigInvalid,
                         "attribute_mapping values must be strings");
        }
        auto value = cond::parse_condition(source_expr.get<std::string>());
        if (!value.ok()) {
            return Error(Errc::ConfigInvalid,
                         "mapping for " + target +
                             " does not parse: " + value.error().message);
        }
        // mapping values are restricted to string-producing forms
        bool string_form =
            std::holds_alternative<cond::AttributePath>(value.value()->node) ||
            std::holds_alternative<cond::StringLiteral>(value.value()->node);
        if (!string_form) {
            return Error(Errc::ConfigInvalid,
                         "mapping for " + target +
                             " must be an attribute path or a literal");
        }
        if (provider.attribute_mapping.find(target) != nullptr) {
            return Error(Errc::ConfigInvalid,
                         "duplicate mapping target " + target);
        }
        provider.attribute_mapping.entries.push_back(
            {target, std::move(value).value()});
    }
    if (provider.attribute_mapping.find("google.subject") == nullptr) {
        return Error(Errc::ConfigInvalid,
                     "attribute_mapping must define google.subject");
    }

    provider.service_account = entry.value("service_account", "");
    if (entry.contains("scopes")) {
        auto scopes = string_list(entry["scopes"], "scopes");
        if (!scopes.ok()) return scopes.error();
        provider.scopes = std::move(scopes).value();
    }
    return provider;
}

Result<sts::WorkloadIdentityPool> parse_pool(const json& doc,
                                             const std::string& fallback_pool_id) {
    sts::WorkloadIdentityPool pool;
    const json* entries = nullptr;
    if (doc.is_array()) {
        pool.pool_id = fallback_pool_id;
        entries = &doc;
    } else if (doc.is_object()) {
        pool.pool_id = doc.value("pool_id", fallback_pool_id);
        if (!doc.contains("providers") || !doc["providers"].is_array()) {
            return Error(Errc::ConfigInvalid,
                         "pool document needs a providers list");
        }
        entries = &doc["providers"];
    } else {
        return Error(Errc::ConfigInvalid, "pool document must be a map or list");
    }
    if (pool.pool_id.empty()) {
        return Error(Errc::ConfigInvalid, "pool id missing");
    }
    for (const auto& entry : *entries) {
        auto provider = parse_provider_config(entry);
        if (!provider.ok()) return provider.error();
        pool.providers.push_back(std::move(provider).value());
    }
    if (pool.providers.empty()) {
        return Error(Errc::ConfigInvalid, "pool has no providers");
    }
    return pool;
}

Result<sts::OidcProviderRegistration> parse_provider_registration(
    const json& doc) {
    if (!doc.is_object()) {
        return Error(Errc::ConfigInvalid, "registration must be an object");
    }
    sts::OidcProviderRegistration reg;
    reg.provider_id = doc.value("provider_id", "");
    reg.issuer = doc.value("issuer", "");
    if (reg.provider_id.empty() || reg.issuer.empty()) {
        return Error(Errc::ConfigInvalid,
                     "registration needs provider_id and issuer");
    }
    if (!doc.contains("audiences")) {
        return Error(Errc::ConfigInvalid, "registration needs audiences");
    }
    auto audiences = string_list(doc["audiences"], "audiences");
    if (!audiences.ok()) return audiences.error();
    reg.audiences = std::move(audiences).value();
    if (reg.audiences.empty()) {
        return Error(Errc::ConfigInvalid, "audiences must be non-empty");
    }
    reg.jwks_uri = doc.value("jwks_uri", "");
    if (doc.contains("jwks")) {
        auto set = jwt::JwkSet::from_json(doc["jwks"]);
        if (!set.ok()) {
            return Error(Errc::ConfigInvalid,
                         "inline jwks invalid: " + set.error().message);
        }
        reg.inline_jwks = std::move(set).value();
    }
    if (reg.jwks_uri.empty() && !reg.inline_jwks) {
        return Error(Errc::ConfigInvalid,
                     "registration needs jwks_uri or inline jwks");
    }
    if (doc.contains("jwks_cache_ttl")) {
        if (!doc["jwks_cache_ttl"].is_number_integer()) {
            return Error(Errc::ConfigInvalid,
                         "jwks_cache_ttl must be an integer");
        }
        reg.jwks_cache_ttl = doc["jwks_cache_ttl"].get<int64_t>();
    }
    return reg;
}

Result<TrustDocument> parse_trust_document(const std::string& text) {
    // Try strict JSON first, then YAML (a superset that also parses JSON,
    // but with scalar-sniffing we prefer the JSON reading when valid).
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        auto converted = yaml_to_json(text);
        if (!converted.ok()) return converted.error();
        doc = std::move(converted).value();
    }

    if (doc.is_object() && doc.contains("Statement")) {
        auto policy = parse_trust_policy(doc);
        if (!policy.ok()) return policy.error();
        return TrustDocument{std::move(policy).value()};
    }
    if (doc.is_object() && doc.value("kind", "") == "oidc-provider") {
        auto reg = parse_provider_registration(doc);
        if (!reg.ok()) return reg.error();
        return TrustDocument{std::move(reg).value()};
    }
    if (doc.is_array() || (doc.is_object() && doc.contains("providers"))) {
        auto pool = parse_pool(doc);
        if (!pool.ok()) return pool.error();
        return TrustDocument{std::move(pool).value()};
    }
    return Error(Errc::ConfigInvalid,
                 "document is not a trust policy, pool, or provider "
                 "registration");
}

}  // namespace fedauth::config
