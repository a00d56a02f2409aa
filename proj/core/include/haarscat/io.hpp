#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace haar {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Flat little-endian float64 arrays.
std::vector<double> read_f64_le(const std::filesystem::path& path);
void write_f64_le(const std::filesystem::path& path, std::span<const double> values);
void append_f64_le(std::vector<std::uint8_t>& out, std::span<const double> values);
std::vector<double> decode_f64_le(std::span<const std::uint8_t> bytes);

nlohmann::json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline; parent directories are created.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// One signal per row, comma separated.
std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path);
void write_csv_rows(const std::filesystem::path& path, const std::vector<std::vector<double>>& rows);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);

}  // namespace haar
