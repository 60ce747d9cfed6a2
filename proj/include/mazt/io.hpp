#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mazt/grid.hpp"

namespace mazt {

struct Polyline;

/// Binary dump: "MAZT", little-endian u32 N, then N^2 little-endian float64
/// in storage order (row i = x index).
void write_field_binary(const ScalarField& f, const std::filesystem::path& path);
ScalarField read_field_binary(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_field_binary(const ScalarField& f);
ScalarField decode_field_binary(const std::vector<std::uint8_t>& bytes);

/// CSV with header i,j,x,y,value.
void write_field_csv(const ScalarField& f, const std::filesystem::path& path);

/// Plain PBM (P1). Row r of the image is x index i = r.
void write_mask_pbm(const TorusGrid& grid, const std::vector<std::uint8_t>& mask,
                    const std::filesystem::path& path);
std::vector<std::uint8_t> read_mask_pbm(const std::filesystem::path& path,
                                        int* n_out = nullptr);

/// CSV columns polyline,vertex,x,y.
void write_polylines_csv(const std::vector<Polyline>& lines,
                         const std::filesystem::path& path);

/// Shortest round-trip decimal representation used by every CSV writer.
std::string format_double(double v);

}  // namespace mazt
