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

#ifndef _HSDUO_DIGEST_H
#define _HSDUO_DIGEST_H

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hsduo {

using NodeId = std::uint32_t;
using ViewNumber = std::uint64_t;

using Digest = std::array<std::uint8_t, 32>;

struct DigestHash {
    size_t operator()(const Digest &d) const noexcept {
        size_t h;
        std::memcpy(&h, d.data(), sizeof(h));
        return h;
    }
};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

std::string to_hex(const Digest &d);

/**
 * Canonical serialization: every field is written as a 4-byte little-endian
 * length followed by its bytes, in declaration order. Integers are encoded
 * little-endian at their natural width.
 */
class CanonicalWriter {
    std::vector<std::uint8_t> buf;

    void put_len(std::uint32_t len) {
        for (int i = 0; i < 4; i++)
            buf.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
    }

    public:
    CanonicalWriter() { buf.reserve(96); }

    CanonicalWriter &bytes(std::span<const std::uint8_t> b) {
        put_len(static_cast<std::uint32_t>(b.size()));
        buf.insert(buf.end(), b.begin(), b.end());
        return *this;
    }

    CanonicalWriter &digest(const Digest &d) { return bytes(d); }

    template<typename T>
    CanonicalWriter &uint(T v) {
        put_len(sizeof(T));
        for (size_t i = 0; i < sizeof(T); i++)
            buf.push_back(static_cast<std::uint8_t>(
                static_cast<std::uint64_t>(v) >> (8 * i)));
        return *this;
    }

    const std::vector<std::uint8_t> &data() const { return buf; }
    Digest hash() const { return sha256(buf); }
};

} // namespace hsduo

#endif
