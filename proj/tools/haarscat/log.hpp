#pragma once

// Progress and diagnostics go to standard error; machine output goes to files.

#include <chrono>
#include <cstdio>

namespace haarcli {

enum class Verbosity { Quiet, Normal, Verbose };

inline Verbosity& verbosity() {
    static Verbosity v = Verbosity::Normal;
    return v;
}

inline double elapsed_s() {
    static const auto start = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <typename... Args>
void log_line(const char* level, const char* fmt, Args... args) {
    std::fprintf(stderr, "[%8.2fs] %s ", elapsed_s(), level);
    if constexpr (sizeof...(Args) == 0) std::fputs(fmt, stderr);
    else std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
}

template <typename... Args>
void log_info(const char* fmt, Args... args) {
    if (verbosity() != Verbosity::Quiet) log_line("info ", fmt, args...);
}

template <typename... Args>
void log_debug(const char* fmt, Args... args) {
    if (verbosity() == Verbosity::Verbose) log_line("debug", fmt, args...);
}

template <typename... Args>
void log_warn(const char* fmt, Args... args) {
    log_line("warn ", fmt, args...);
}

template <typename... Args>
void log_error(const char* fmt, Args... args) {
    log_line("error", fmt, args...);
}

}  // namespace haarcli
