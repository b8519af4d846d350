/*
 Copyright 2026 the msbench authors
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <cctype>
#include <fstream>
#include <string>

#include "msbench/error.hpp"
#include "msbench/imageproc.hpp"

namespace msbench {

namespace detail {

// Next whitespace-delimited token, skipping '#' comments (PNM headers
// allow them anywhere between fields).
inline std::string pnm_token(std::istream& in, const std::string& path) {
    char c;
    while (in.get(c)) {
        if (c == '#') {
            while (in.get(c) && c != '\n') {}
            continue;
        }
        if (!std::isspace(static_cast<unsigned char>(c))) break;
    }
    if (!in) throw DataError(path + ": truncated header");
    std::string tok(1, c);
    while (in.get(c)) {
        if (std::isspace(static_cast<unsigned char>(c))) break;
        tok += c;
    }
    return tok;
}

inline int pnm_header_int(std::istream& in, const std::string& path, const char* field) {
    const std::string tok = pnm_token(in, path);
    try {
        std::size_t pos = 0;
        const int value = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return value;
    } catch (const std::exception&) {
        throw DataError(path + ": bad " + field + " '" + tok + "'");
    }
}

}  // namespace detail

/// Reads a binary PGM (P5). Maximum value must be 255.
inline GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open");
    if (detail::pnm_token(in, path) != "P5") throw DataError(path + ": not a binary PGM");
    const int w = detail::pnm_header_int(in, path, "width");
    const int h = detail::pnm_header_int(in, path, "height");
    const int maxval = detail::pnm_header_int(in, path, "maxval");
    if (w <= 0 || h <= 0) throw DataError(path + ": bad dimensions");
    if (maxval != 255) throw DataError(path + ": unsupported maxval");
    GrayImage img(w, h);
    in.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
        throw DataError(path + ": truncated pixel data");
    return img;
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot open for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
    if (!out) throw DataError(path + ": write failed");
}

/// Reads a binary PPM (P6) into three planes.
inline PlanarImage read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open");
    if (detail::pnm_token(in, path) != "P6") throw DataError(path + ": not a binary PPM");
    const int w = detail::pnm_header_int(in, path, "width");
    const int h = detail::pnm_header_int(in, path, "height");
    const int maxval = detail::pnm_header_int(in, path, "maxval");
    if (w <= 0 || h <= 0) throw DataError(path + ": bad dimensions");
    if (maxval != 255) throw DataError(path + ": unsupported maxval");
    PlanarImage img{{GrayImage(w, h), GrayImage(w, h), GrayImage(w, h)}};
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (in.gcount() != static_cast<std::streamsize>(row.size()))
            throw DataError(path + ": truncated pixel data");
        for (int x = 0; x < w; ++x)
            for (int p = 0; p < 3; ++p)
                img.planes[p].at(x, y) = row[static_cast<std::size_t>(x) * 3 + p];
    }
    return img;
}

inline void write_ppm(const std::string& path, const PlanarImage& img) {
    const int w = img.planes[0].width;
    const int h = img.planes[0].height;
    for (const auto& p : img.planes)
        if (p.width != w || p.height != h)
            throw DataError(path + ": plane dimensions differ");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot open for writing");
    out << "P6\n" << w << " " << h << "\n255\n";
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x)
            for (int p = 0; p < 3; ++p)
                row[static_cast<std::size_t>(x) * 3 + p] = img.planes[p].at(x, y);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw DataError(path + ": write failed");
}

}  // namespace msbench
