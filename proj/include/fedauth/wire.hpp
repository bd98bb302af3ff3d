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

// Wire shapes shared by the HTTP endpoints and the in-process channels, so
// both transports carry identical bodies and status codes.

#pragma once

#include <nlohmann/json.hpp>

#include "fedauth/error.hpp"
#include "fedauth/sts.hpp"

namespace fedauth::wire {

int errc_http_status(Errc code);

nlohmann::json error_to_json(const Error& err);
Error error_from_json(const nlohmann::json& body, int status);

nlohmann::json credential_to_json(const sts::NativeCredential& cred);
nlohmann::json federated_token_to_json(const sts::FederatedToken& fed);

}  // namespace fedauth::wire
