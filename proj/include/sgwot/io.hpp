#pragma once

#include "sgwot/types.hpp"

#include <string>
#include <tuple>
#include <vector>

namespace sgwot {

/// Rectangular CSV of doubles, no header.
Matrix read_csv_matrix(const std::string& path);

/// One row per entry above dump_tol, header "i,j,value", 17 significant digits.
void write_coupling_csv(const std::string& path, const Matrix& p, double dump_tol);

/// Reads triplets back into a dense rows x cols matrix. Dimensions are taken
/// from the header-free maxima unless given.
Matrix read_coupling_csv(const std::string& path, Index rows = -1, Index cols = -1);

/// Header "cover_size,mass".
void write_covers_csv(const std::string& path,
                      const std::vector<std::pair<std::size_t, double>>& size_mass);

/// Header "point_index,representative_index".
void write_assignment_csv(const std::string& path, const std::vector<Index>& assignment);
std::vector<Index> read_assignment_csv(const std::string& path);

/// Header "representative_index,point_index"; one row per representative.
void write_representatives_csv(const std::string& path, const std::vector<Index>& rep_point);
std::vector<Index> read_representatives_csv(const std::string& path);

/// %.17g rendering used for all numeric output.
std::string format_double(double v);

}  // namespace sgwot
