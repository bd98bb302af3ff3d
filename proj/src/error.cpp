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

#include "fedauth/error.hpp"

#include <array>
#include <utility>

namespace fedauth {

namespace {

constexpr std::array<std::pair<Errc, std::string_view>, 34> kNames{{
    {Errc::UnsupportedAlgorithm, "UnsupportedAlgorithm"},
    {Errc::InvalidClaims, "InvalidClaims"},
    {Errc::UnknownKeyId, "UnknownKeyId"},
    {Errc::BadSignature, "BadSignature"},
    {Errc::IssuerMismatch, "IssuerMismatch"},
    {Errc::AudienceMismatch, "AudienceMismatch"},
    {Errc::Expired, "Expired"},
    {Errc::NotYetValid, "NotYetValid"},
    {Errc::Malformed, "Malformed"},
    {Errc::SyntaxError, "SyntaxError"},
    {Errc::DepthExceeded, "DepthExceeded"},
    {Errc::MissingAttribute, "MissingAttribute"},
    {Errc::TypeMismatch, "TypeMismatch"},
    {Errc::InvalidName, "InvalidName"},
    {Errc::UnknownPod, "UnknownPod"},
    {Errc::AudienceEmpty, "AudienceEmpty"},
    {Errc::DuplicateIssuer, "DuplicateIssuer"},
    {Errc::DuplicateProvider, "DuplicateProvider"},
    {Errc::JwksUnreachable, "JwksUnreachable"},
    {Errc::UnknownProvider, "UnknownProvider"},
    {Errc::UnknownRole, "UnknownRole"},
    {Errc::VerificationFailed, "VerificationFailed"},
    {Errc::ConditionDenied, "ConditionDenied"},
    {Errc::MappingFailed, "MappingFailed"},
    {Errc::NotAuthorized, "NotAuthorized"},
    {Errc::ExpiredFederatedToken, "ExpiredFederatedToken"},
    {Errc::TokenAcquisitionFailed, "TokenAcquisitionFailed"},
    {Errc::ExchangeFailed, "ExchangeFailed"},
    {Errc::MissingRequiredHeader, "MissingRequiredHeader"},
    {Errc::UnknownKey, "UnknownKey"},
    {Errc::ScenarioMalformed, "ScenarioMalformed"},
    {Errc::StartupFailure, "StartupFailure"},
    {Errc::ConfigInvalid, "ConfigInvalid"},
    {Errc::TransportError, "TransportError"},
}};

}  // namespace

std::string_view errc_name(Errc code) {
    for (const auto& [c, name] : kNames) {
        if (c == code) return name;
    }
    return "UnknownError";
}

std::optional<Errc> errc_from_name(std::string_view name) {
    for (const auto& [c, n] : kNames) {
        if (n == name) return c;
    }
    return std::nullopt;
}

std::string Error::to_string() const {
    std::string out(errc_name(code));
    if (cause) {
        out += "(";
        out += errc_name(*cause);
        out += ")";
    }
    if (!message.empty()) {
        out += ": ";
        out += message;
    }
    return out;
}

}  // namespace fedauth
