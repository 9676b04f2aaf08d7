#include "aetrace/fsutil.hpp"

#include <doctest.h>

#include <filesystem>

#include "aetrace/errors.hpp"
#include "test_util.hpp"

using namespace aetrace;
namespace fs = std::filesystem;

TEST_CASE("fsutil: write then read round trips binary content") {
    testutil::TempDir tmp;
    std::string content("pdf\0bytes\r\n\xff", 12);
    write_file(tmp / "f.bin", content);
    CHECK(read_file(tmp / "f.bin") == content);
}

TEST_CASE("fsutil: read_file on a missing path throws") {
    testutil::TempDir tmp;
    CHECK_THROWS_AS(read_file(tmp / "missing.txt"), Error);
}

TEST_CASE("fsutil: write_file_if_changed skips identical content") {
    testutil::TempDir tmp;
    auto path = tmp / "out.txt";
    CHECK(write_file_if_changed(path, "v1"));
    auto first_mtime = fs::last_write_time(path);
    CHECK_FALSE(write_file_if_changed(path, "v1"));
    CHECK(fs::last_write_time(path) == first_mtime); // untouched on no-op
    CHECK(write_file_if_changed(path, "v2"));
    CHECK(read_file(path) == "v2");
}

TEST_CASE("fsutil: atomic write replaces content and leaves no temp files") {
    testutil::TempDir tmp;
    auto path = tmp / "a.json";
    write_file_atomic(path, "one");
    write_file_atomic(path, "two");
    CHECK(read_file(path) == "two");
    size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(tmp.path)) ++entries;
    CHECK(entries == 1);
}
