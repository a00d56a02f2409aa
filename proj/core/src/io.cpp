#include "haarscat/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "haarscat/common.hpp"

namespace haar {

namespace fs = std::filesystem;

namespace {

void ensure_parent(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

}  // namespace

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error("read failed: " + path.string());
    return bytes;
}

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + path.string());
}

void append_f64_le(std::vector<std::uint8_t>& out, std::span<const double> values) {
    for (const double v : values) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            out.push_back(static_cast<std::uint8_t>(bits & 0xff));
            bits >>= 8;
        }
    }
}

std::vector<double> decode_f64_le(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % 8 != 0) throw Error("float64 payload length is not a multiple of 8");
    std::vector<double> values(bytes.size() / 8);
    for (std::size_t k = 0; k < values.size(); ++k) {
        std::uint64_t bits = 0;
        for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes[8 * k + i];
        values[k] = std::bit_cast<double>(bits);
    }
    return values;
}

std::vector<double> read_f64_le(const fs::path& path) { return decode_f64_le(read_bytes(path)); }

void write_f64_le(const fs::path& path, std::span<const double> values) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(values.size() * 8);
    append_f64_le(bytes, values);
    write_bytes(path, bytes);
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

std::vector<std::vector<double>> read_csv_rows(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t end = line.find(',', start);
            if (end == std::string::npos) end = line.size();
            std::string field = line.substr(start, end - start);
            const auto first = field.find_first_not_of(" \t");
            const auto last = field.find_last_not_of(" \t");
            if (first == std::string::npos)
                throw Error(path.string() + ":" + std::to_string(line_no) + ": empty field");
            field = field.substr(first, last - first + 1);
            double v = 0.0;
            const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
            if (res.ec != std::errc() || res.ptr != field.data() + field.size())
                throw Error(path.string() + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
            row.push_back(v);
            start = end + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw Error(path.string() + ":" + std::to_string(line_no) + ": row length differs from first row");
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_csv_rows(const fs::path& path, const std::vector<std::vector<double>>& rows) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << std::setprecision(17);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << value;
    return os.str();
}

}  // namespace haar
