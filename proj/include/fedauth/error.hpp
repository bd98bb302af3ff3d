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

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace fedauth {

/// Typed error codes shared across the library. Every denial or failure an
/// operation can produce maps to exactly one of these; free-form detail goes
/// in Error::message.
enum class Errc {
    // token minting / verification
    UnsupportedAlgorithm,
    InvalidClaims,
    UnknownKeyId,
    BadSignature,
    IssuerMismatch,
    AudienceMismatch,
    Expired,
    NotYetValid,
    Malformed,
    // condition language
    SyntaxError,
    DepthExceeded,
    MissingAttribute,
    TypeMismatch,
    // identity provider
    InvalidName,
    UnknownPod,
    AudienceEmpty,
    // security token service
    DuplicateIssuer,
    DuplicateProvider,
    JwksUnreachable,
    UnknownProvider,
    UnknownRole,
    VerificationFailed,
    ConditionDenied,
    MappingFailed,
    NotAuthorized,
    ExpiredFederatedToken,
    // workload client
    TokenAcquisitionFailed,
    ExchangeFailed,
    // legacy signer
    MissingRequiredHeader,
    UnknownKey,
    // harness / config
    ScenarioMalformed,
    StartupFailure,
    ConfigInvalid,
    TransportError,
};

std::string_view errc_name(Errc code);
std::optional<Errc> errc_from_name(std::string_view name);

/// An error with a typed code, a human-readable message, and (for wrapped
/// failures such as VerificationFailed) the inner cause.
struct Error {
    Errc code;
    std::string message;
    std::optional<Errc> cause;

    Error(Errc c, std::string msg = {}) : code(c), message(std::move(msg)) {}
    Error(Errc c, std::string msg, Errc inner)
        : code(c), message(std::move(msg)), cause(inner) {}

    std::string to_string() const;
};

/// Wraps an inner error as the cause of an outer code, keeping the inner
/// code reachable for callers that branch on it.
inline Error wrap_error(Errc outer, const Error& inner) {
    // Preserve the innermost cause when re-wrapping.
    Errc deepest = inner.cause.value_or(inner.code);
    return Error(outer, inner.message, deepest);
}

/// Minimal expected-like result. Holds either a value or an Error.
template <typename T>
class Result {
  public:
    Result(T value) : v_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
    Result(Error err) : v_(std::move(err)) {}  // NOLINT(google-explicit-constructor)

    [[nodiscard]] bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }

    [[nodiscard]] const T& value() const& { return std::get<T>(v_); }
    [[nodiscard]] T& value() & { return std::get<T>(v_); }
    [[nodiscard]] T&& value() && { return std::get<T>(std::move(v_)); }

    [[nodiscard]] const Error& error() const { return std::get<Error>(v_); }

  private:
    std::variant<T, Error> v_;
};

template <>
class Result<void> {
  public:
    Result() = default;
    Result(Error err) : err_(std::move(err)) {}  // NOLINT(google-explicit-constructor)

    [[nodiscard]] bool ok() const { return !err_.has_value(); }
    explicit operator bool() const { return ok(); }
    [[nodiscard]] const Error& error() const { return *err_; }

  private:
    std::optional<Error> err_;
};

using Status = Result<void>;

}  // namespace fedauth
