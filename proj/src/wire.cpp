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

#include "fedauth/wire.hpp"

namespace fedauth::wire {

using nlohmann::json;

int errc_http_status(Errc code) {
    switch (code) {
        case Errc::VerificationFailed:
        case Errc::BadSignature:
        case Errc::Expired:
        case Errc::NotYetValid:
        case Errc::ExpiredFederatedToken:
        case Errc::UnknownKeyId:
        case Errc::IssuerMismatch:
        case Errc::AudienceMismatch:
            return 401;
        case Errc::ConditionDenied:
        case Errc::NotAuthorized:
            return 403;
        case Errc::UnknownProvider:
        case Errc::UnknownRole:
        case Errc::UnknownPod:
            return 404;
        case Errc::DuplicateIssuer:
        case Errc::DuplicateProvider:
            return 409;
        case Errc::Malformed:
        case Errc::InvalidClaims:
        case Errc::AudienceEmpty:
        case Errc::InvalidName:
        case Errc::ConfigInvalid:
        case Errc::MappingFailed:
            return 422;
        case Errc::JwksUnreachable:
            return 502;
        default:
            return 400;
    }
}

json error_to_json(const Error& err) {
    json body;
    body["error"] = std::string(errc_name(err.code));
    body["message"] = err.message;
    if (err.cause) body["cause"] = std::string(errc_name(*err.cause));
    return body;
}

Error error_from_json(const json& body, int status) {
    Errc code = Errc::ExchangeFailed;
    if (body.is_object() && body.contains("error") &&
        body["error"].is_string()) {
        if (auto parsed = errc_from_name(body["error"].get<std::string>())) {
            code = *parsed;
        }
    }
    std::string message =
        body.is_object() ? body.value("message", "") : std::string{};
    if (body.is_object() && body.contains("cause") &&
        body["cause"].is_string()) {
        if (auto cause = errc_from_name(body["cause"].get<std::string>())) {
            return Error(code, message, *cause);
        }
    }
    if (message.empty()) message = "status " + std::to_string(status);
    return Error(code, message);
}

json credential_to_json(const sts::NativeCredential& cred) {
    return json{{"credential_id", cred.credential_id},
                {"secret", cred.secret},
                {"session_token", cred.session_token},
                {"expires_at", cred.expires_at},
                {"scopes", cred.scopes},
                {"principal", cred.principal}};
}

json federated_token_to_json(const sts::FederatedToken& fed) {
    return json{{"token_id", fed.token_id},
                {"value", fed.value},
                {"pool", fed.pool_id},
                {"provider", fed.provider_id},
                {"attributes", fed.attributes},
                {"expires_at", fed.expires_at}};
}

}  // namespace fedauth::wire
