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

#include <stdexcept>
#include <string>

namespace msbench {

/// Anything wrong with input data: malformed files, inconsistent ground
/// truth, mismatched detection sets. The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// DataError carrying a file location, formatted as "file:line: message"
/// (line 0 means the error is not tied to a particular line).
struct ParseError : DataError {
    ParseError(const std::string& file, std::size_t line, const std::string& message)
        : DataError(line > 0 ? file + ":" + std::to_string(line) + ": " + message
                             : file + ": " + message) {}
};

}  // namespace msbench
