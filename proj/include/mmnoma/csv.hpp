// SPDX-License-Identifier: Apache-2.0
//
// Minimal CSV output with round-trippable doubles.
#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace mmnoma {

/// 17 significant digits; "nan", "inf" and "-inf" spelled out.
inline std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class CsvWriter
{
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    /// `# key: value` line ahead of the header.
    void meta(const std::string& key, const std::string& value) { out_ << "# " << key << ": " << value << '\n'; }

    void header(const std::vector<std::string>& columns) { row(columns); }

    void row(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i)
        {
            if (i)
                out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ostream& out_;
};

} // namespace mmnoma
