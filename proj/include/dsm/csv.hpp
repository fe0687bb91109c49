// csv.hpp — deterministic CSV emission for figure data
//
// Dialect: comma separator, '.' decimal point, 15 significant digits, exponent
// notation for |x| < 1e-4, metadata lines prefixed with '#'.
#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsm::csv {

inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::trunc) {
        if (!out_) throw std::runtime_error("csv: cannot open output '" + path + "'");
    }

    void comment(const std::string& line) { out_ << "# " << line << "\n"; }

    void header(const std::vector<std::string>& names) { write_row(names); }

    void row(const std::vector<std::string>& cells) { write_row(cells); }

    static std::string cell(double x) { return format_number(x); }

private:
    void write_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << "\n";
    }
    std::ofstream out_;
};

}  // namespace dsm::csv
