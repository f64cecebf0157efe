#include "sgwot/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sgwot {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": cannot parse '" + s +
                                 "' as a number");
    }
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Matrix read_csv_matrix(const std::string& path) {
    const auto lines = read_lines(path);
    std::vector<std::vector<double>> rows;
    for (std::size_t t = 0; t < lines.size(); ++t) {
        if (lines[t].empty()) continue;
        const auto fields = split_line(lines[t]);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_double(f, path, t + 1));
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw std::runtime_error(path + ":" + std::to_string(t + 1) +
                                     ": ragged row (expected " +
                                     std::to_string(rows.front().size()) + " fields)");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no data rows");
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

void write_coupling_csv(const std::string& path, const Matrix& p, double dump_tol) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "i,j,value\n";
    for (Index i = 0; i < p.rows(); ++i) {
        for (Index j = 0; j < p.cols(); ++j) {
            if (p(i, j) > dump_tol) {
                out << i << "," << j << "," << format_double(p(i, j)) << "\n";
            }
        }
    }
}

Matrix read_coupling_csv(const std::string& path, Index rows, Index cols) {
    const auto lines = read_lines(path);
    std::vector<std::tuple<Index, Index, double>> triplets;
    Index max_i = -1, max_j = -1;
    for (std::size_t t = 0; t < lines.size(); ++t) {
        if (lines[t].empty()) continue;
        if (t == 0 && lines[t].rfind("i,j,", 0) == 0) continue;
        const auto fields = split_line(lines[t]);
        if (fields.size() != 3) {
            throw std::runtime_error(path + ":" + std::to_string(t + 1) + ": expected i,j,value");
        }
        const auto i = static_cast<Index>(parse_double(fields[0], path, t + 1));
        const auto j = static_cast<Index>(parse_double(fields[1], path, t + 1));
        const double v = parse_double(fields[2], path, t + 1);
        if (i < 0 || j < 0) throw std::runtime_error(path + ": negative index");
        max_i = std::max(max_i, i);
        max_j = std::max(max_j, j);
        triplets.emplace_back(i, j, v);
    }
    if (rows < 0) rows = max_i + 1;
    if (cols < 0) cols = max_j + 1;
    if (max_i >= rows || max_j >= cols) {
        throw std::runtime_error(path + ": index exceeds the requested dimensions");
    }
    Matrix p = Matrix::Zero(rows, cols);
    for (const auto& [i, j, v] : triplets) p(i, j) = v;
    return p;
}

void write_covers_csv(const std::string& path,
                      const std::vector<std::pair<std::size_t, double>>& size_mass) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "cover_size,mass\n";
    for (const auto& [size, mass] : size_mass) {
        out << size << "," << format_double(mass) << "\n";
    }
}

void write_assignment_csv(const std::string& path, const std::vector<Index>& assignment) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "point_index,representative_index\n";
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        out << i << "," << assignment[i] << "\n";
    }
}

std::vector<Index> read_assignment_csv(const std::string& path) {
    const auto lines = read_lines(path);
    std::vector<std::pair<Index, Index>> pairs;
    for (std::size_t t = 0; t < lines.size(); ++t) {
        if (lines[t].empty()) continue;
        if (t == 0 && lines[t].rfind("point_index", 0) == 0) continue;
        const auto fields = split_line(lines[t]);
        if (fields.size() != 2) {
            throw std::runtime_error(path + ":" + std::to_string(t + 1) + ": expected two fields");
        }
        pairs.push_back({static_cast<Index>(parse_double(fields[0], path, t + 1)),
                         static_cast<Index>(parse_double(fields[1], path, t + 1))});
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<Index> out;
    out.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].first != static_cast<Index>(i)) {
            throw std::runtime_error(path + ": point indices must cover 0..n-1");
        }
        out.push_back(pairs[i].second);
    }
    return out;
}

void write_representatives_csv(const std::string& path, const std::vector<Index>& rep_point) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "representative_index,point_index\n";
    for (std::size_t r = 0; r < rep_point.size(); ++r) {
        out << r << "," << rep_point[r] << "\n";
    }
}

std::vector<Index> read_representatives_csv(const std::string& path) {
    const auto lines = read_lines(path);
    std::vector<std::pair<Index, Index>> pairs;
    for (std::size_t t = 0; t < lines.size(); ++t) {
        if (lines[t].empty()) continue;
        if (t == 0 && lines[t].rfind("representative_index", 0) == 0) continue;
        const auto fields = split_line(lines[t]);
        if (fields.size() != 2) {
            throw std::runtime_error(path + ":" + std::to_string(t + 1) + ": expected two fields");
        }
        pairs.push_back({static_cast<Index>(parse_double(fields[0], path, t + 1)),
                         static_cast<Index>(parse_double(fields[1], path, t + 1))});
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<Index> out;
    out.reserve(pairs.size());
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        if (pairs[r].first != static_cast<Index>(r)) {
            throw std::runtime_error(path + ": representative indices must cover 0..k-1");
        }
        out.push_back(pairs[r].second);
    }
    return out;
}

}  // namespace sgwot
