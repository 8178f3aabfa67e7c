/*
 * Copyright 2026 The ergocert Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Internal content hashing (FNV-1a, 64-bit) used to fingerprint parameter
// grids in certificates and to key the result cache.  Not installed.

#ifndef ERGOCERT_SRC_HASHING_HPP
#define ERGOCERT_SRC_HASHING_HPP

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "ergocert/statespace.hpp"

namespace ergocert
{

class Fnv1a64
{
public:
    Fnv1a64& bytes(const void* data, std::size_t len)
    {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i)
        {
            state_ ^= p[i];
            state_ *= 0x100000001b3ull;
        }
        return *this;
    }

    Fnv1a64& add(double x)
    {
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof(bits));
        return bytes(&bits, sizeof(bits));
    }

    Fnv1a64& add(std::uint64_t x) { return bytes(&x, sizeof(x)); }

    Fnv1a64& add(const std::string& s) { return bytes(s.data(), s.size()); }

    Fnv1a64& add(const std::vector<double>& xs)
    {
        add(static_cast<std::uint64_t>(xs.size()));
        for (double x : xs) add(x);
        return *this;
    }

    std::uint64_t value() const { return state_; }

    std::string hex() const
    {
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        std::uint64_t v = state_;
        for (int i = 15; i >= 0; --i)
        {
            out[static_cast<std::size_t>(i)] = digits[v & 0xf];
            v >>= 4;
        }
        return out;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ull;
};

// Fingerprint of the parameter grid recorded in certificate provenance.
inline std::string grid_hash_hex(const ParametricFamily& family)
{
    Fnv1a64 h;
    h.add(static_cast<std::uint64_t>(family.theta_grid.size()));
    for (const auto& theta : family.theta_grid) h.add(theta);
    return h.hex();
}

}  // namespace ergocert

#endif  // ERGOCERT_SRC_HASHING_HPP
