/**
 * Copyright 2026 The hsduo Authors
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

#include <memory>

#include <openssl/evp.h>

#include "hsduo/digest.h"
#include "hsduo/error.h"

namespace hsduo {

namespace {

// SHA256() looks the algorithm up on every call; fetch it once instead
struct MdDeleter {
    void operator()(EVP_MD *md) const { EVP_MD_free(md); }
    void operator()(EVP_MD_CTX *ctx) const { EVP_MD_CTX_free(ctx); }
};

const EVP_MD *sha256_md() {
    static const std::unique_ptr<EVP_MD, MdDeleter> md(EVP_MD_fetch(nullptr, "SHA256", nullptr));
    if (!md) throw Error("SHA-256 unavailable in libcrypto");
    return md.get();
}

} // namespace

Digest sha256(std::span<const std::uint8_t> data) {
    thread_local const std::unique_ptr<EVP_MD_CTX, MdDeleter> ctx(EVP_MD_CTX_new());
    Digest out;
    unsigned int len = 0;
    if (!ctx || !EVP_DigestInit_ex2(ctx.get(), sha256_md(), nullptr) ||
        !EVP_DigestUpdate(ctx.get(), data.data(), data.size()) ||
        !EVP_DigestFinal_ex(ctx.get(), out.data(), &len))
        throw Error("SHA-256 failed");
    return out;
}

Digest sha256(std::string_view data) {
    return sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t *>(data.data()), data.size()));
}

std::string to_hex(const Digest &d) {
    static const char hex[] = "0123456789abcdef";
    std::string s;
    s.reserve(d.size() * 2);
    for (auto b: d)
    {
        s.push_back(hex[b >> 4]);
        s.push_back(hex[b & 0xf]);
    }
    return s;
}

} // namespace hsduo
