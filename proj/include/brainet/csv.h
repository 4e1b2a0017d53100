/*
 * Copyright 2026 The Brainet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BRAINET_CSV_H_
#define BRAINET_CSV_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace brainet::csv {

using Row = std::vector<std::string>;

// Parses RFC-4180 text: comma separated, optional double-quoted fields with
// "" escapes, CRLF or LF line endings, embedded newlines inside quotes. A
// trailing newline does not produce an empty record. A leading UTF-8 BOM is
// skipped.
std::vector<Row> Parse(std::string_view text);

std::vector<Row> ReadFile(const std::filesystem::path& path);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string EscapeField(std::string_view field);

std::string FormatRow(const Row& row);

// Writes the rows with LF line endings. Throws IoError on failure.
void WriteFile(const std::filesystem::path& path, const std::vector<Row>& rows);

}  // namespace brainet::csv

#endif  // BRAINET_CSV_H_
