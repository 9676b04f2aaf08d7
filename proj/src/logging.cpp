#include "aetrace/logging.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>

namespace aetrace {

const char* log_level_name(LogLevel level) {
    switch (level) {
    case LogLevel::Info: return "info";
    case LogLevel::Warning: return "warning";
    case LogLevel::Error: return "error";
    }
    return "info";
}

Log& null_log() {
    static NullLog instance;
    return instance;
}

void MemoryLog::record(LogLevel level, const std::string& event, const std::string& message,
                       nlohmann::json fields) {
    std::lock_guard lock(mu_);
    records_.push_back({level, event, message, std::move(fields)});
}

size_t MemoryLog::count(LogLevel level) const {
    std::lock_guard lock(mu_);
    size_t n = 0;
    for (const auto& r : records_)
        if (r.level == level) ++n;
    return n;
}

bool MemoryLog::has_event(const std::string& event) const {
    std::lock_guard lock(mu_);
    for (const auto& r : records_)
        if (r.event == event) return true;
    return false;
}

namespace {
std::string utc_now_iso() {
    auto now = std::chrono::system_clock::now();
    auto t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}
} // namespace

JsonlLog::JsonlLog(const std::filesystem::path& file, std::string stage, bool echo_stderr)
    : stage_(std::move(stage)), echo_stderr_(echo_stderr) {
    std::filesystem::create_directories(file.parent_path());
    out_.open(file, std::ios::app);
}

void JsonlLog::record(LogLevel level, const std::string& event, const std::string& message,
                      nlohmann::json fields) {
    std::lock_guard lock(mu_);
    if (level == LogLevel::Warning) ++warnings_;
    if (level == LogLevel::Error) ++errors_;

    nlohmann::json rec{{"ts", utc_now_iso()},
                       {"stage", stage_},
                       {"level", log_level_name(level)},
                       {"event", event},
                       {"message", message}};
    if (!fields.is_null() && !fields.empty()) rec["fields"] = std::move(fields);
    if (out_) out_ << rec.dump() << '\n' << std::flush;
    if (echo_stderr_ && level != LogLevel::Info)
        std::cerr << "[" << stage_ << "] " << log_level_name(level) << ": " << event << " - "
                  << message << '\n';
}

} // namespace aetrace
