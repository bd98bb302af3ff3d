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

#include "fedauth/sigv4.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "fedauth/crypto_util.hpp"

namespace fedauth::legacy {

namespace {

constexpr const char* kAlgorithmTag = "AWS4-HMAC-SHA256";

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return s;
}

// Trim ends and collapse runs of inner whitespace to one space.
std::string normalize_header_value(const std::string& value) {
    std::string out;
    bool in_space = false;
    for (char c : value) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(c);
    }
    return out;
}

std::string uri_encode(const std::string& in, bool keep_slash) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : in) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' ||
            (keep_slash && c == '/')) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    return out;
}

}  // namespace

std::optional<std::string> HttpRequest::header(std::string_view name) const {
    for (const auto& [k, v] : headers) {
        if (to_lower(k) == to_lower(std::string(name))) return v;
    }
    return std::nullopt;
}

std::string CanonicalRequest::to_string() const {
    return method + "\n" + canonical_uri + "\n" + canonical_query + "\n" +
           canonical_headers + "\n" + signed_headers + "\n" + payload_hash;
}

Result<CanonicalRequest> canonicalize(const HttpRequest& request) {
    if (request.method.empty() || request.path.empty()) {
        return Error(Errc::MissingRequiredHeader,
                     "request needs a method and a path");
    }
    if (!request.header("host")) {
        return Error(Errc::MissingRequiredHeader, "host header is required");
    }
    if (!request.header("x-amz-date")) {
        return Error(Errc::MissingRequiredHeader,
                     "x-amz-date header is required");
    }

    CanonicalRequest canonical;
    canonical.method = request.method;
    canonical.canonical_uri =
        uri_encode(request.path, /*keep_slash=*/true);

    auto query = request.query;
    for (auto& [k, v] : query) {
        k = uri_encode(k, false);
        v = uri_encode(v, false);
    }
    std::sort(query.begin(), query.end());
    std::string qs;
    for (size_t i = 0; i < query.size(); ++i) {
        if (i > 0) qs.push_back('&');
        qs += query[i].first + "=" + query[i].second;
    }
    canonical.canonical_query = qs;

    std::vector<std::pair<std::string, std::string>> headers;
    headers.reserve(request.headers.size());
    for (const auto& [k, v] : request.headers) {
        headers.emplace_back(to_lower(k), normalize_header_value(v));
    }
    std::sort(headers.begin(), headers.end());

    std::string header_block;
    std::string signed_list;
    for (size_t i = 0; i < headers.size(); ++i) {
        header_block += headers[i].first + ":" + headers[i].second + "\n";
        if (i > 0) signed_list.push_back(';');
        signed_list += headers[i].first;
    }
    canonical.canonical_headers = header_block;
    canonical.signed_headers = signed_list;
    canonical.payload_hash = sha256_hex(request.payload);
    return canonical;
}

std::string credential_scope(const std::string& date, const std::string& region,
                             const std::string& service) {
    return date + "/" + region + "/" + service + "/aws4_request";
}

Result<std::string> string_to_sign(const HttpRequest& request,
                                   const std::string& date,
                                   const std::string& region,
                                   const std::string& service) {
    auto canonical = canonicalize(request);
    if (!canonical.ok()) return canonical.error();
    std::string timestamp = *request.header("x-amz-date");
    return std::string(kAlgorithmTag) + "\n" + timestamp + "\n" +
           credential_scope(date, region, service) + "\n" +
           sha256_hex(canonical.value().to_string());
}

Result<std::string> sign(const HttpRequest& request, const StaticKey& key,
                         const std::string& date, const std::string& region,
                         const std::string& service) {
    auto canonical = canonicalize(request);
    if (!canonical.ok()) return canonical.error();
    auto sts = string_to_sign(request, date, region, service);
    if (!sts.ok()) return sts.error();

    std::string k_date = hmac_sha256("AWS4" + key.secret_key, date);
    std::string k_region = hmac_sha256(k_date, region);
    std::string k_service = hmac_sha256(k_region, service);
    std::string k_signing = hmac_sha256(k_service, "aws4_request");
    std::string signature = hex_encode(hmac_sha256(k_signing, sts.value()));

    std::ostringstream header;
    header << kAlgorithmTag << " Credential=" << key.access_key_id << "/"
           << credential_scope(date, region, service)
           << ", SignedHeaders=" << canonical.value().signed_headers
           << ", Signature=" << signature;
    return header.str();
}

void LegacyKeystore::add(StaticKey key) {
    keys_[key.access_key_id] = std::move(key);
}

const StaticKey* LegacyKeystore::find(const std::string& access_key_id) const {
    auto it = keys_.find(access_key_id);
    return it == keys_.end() ? nullptr : &it->second;
}

Result<std::string> LegacyKeystore::sign_with(const std::string& access_key_id,
                                              const HttpRequest& request,
                                              const std::string& date,
                                              const std::string& region,
                                              const std::string& service) const {
    const StaticKey* key = find(access_key_id);
    if (key == nullptr) {
        return Error(Errc::UnknownKey, "no static key " + access_key_id);
    }
    return sign(request, *key, date, region, service);
}

VerifyDecision verify(const HttpRequest& request,
                      const std::string& authorization_header,
                      const LegacyKeystore& keystore, int64_t now) {
    (void)now;  // the legacy model has nothing to compare `now` against

    auto field = [&](const std::string& name) -> std::optional<std::string> {
        auto pos = authorization_header.find(name + "=");
        if (pos == std::string::npos) return std::nullopt;
        pos += name.size() + 1;
        auto end = authorization_header.find_first_of(", ", pos);
        if (end == std::string::npos) end = authorization_header.size();
        return authorization_header.substr(pos, end - pos);
    };

    if (authorization_header.rfind(std::string(kAlgorithmTag) + " ", 0) != 0) {
        return {false, "unknown authorization scheme"};
    }
    auto credential = field("Credential");
    auto signature = field("Signature");
    if (!credential || !signature) {
        return {false, "authorization header missing Credential or Signature"};
    }

    // Credential = <key-id>/<date>/<region>/<service>/aws4_request
    std::vector<std::string> parts;
    std::stringstream ss(*credential);
    std::string item;
    while (std::getline(ss, item, '/')) parts.push_back(item);
    if (parts.size() != 5 || parts[4] != "aws4_request") {
        return {false, "malformed credential scope"};
    }
    const StaticKey* key = keystore.find(parts[0]);
    if (key == nullptr) {
        return {false, "unknown access key id " + parts[0]};
    }

    auto expected = sign(request, *key, parts[1], parts[2], parts[3]);
    if (!expected.ok()) {
        return {false, "request not canonicalizable: " +
                           expected.error().message};
    }
    const std::string& recomputed = expected.value();
    auto pos = recomputed.find("Signature=");
    std::string recomputed_sig = recomputed.substr(pos + 10);

    if (!constant_time_equal(recomputed_sig, *signature)) {
        return {false, "signature mismatch"};
    }
    return {true, ""};
}

}  // namespace fedauth::legacy
