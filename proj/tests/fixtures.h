#ifndef QEFORGE_TESTS_FIXTURES_H_
#define QEFORGE_TESTS_FIXTURES_H_

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#ifndef QEFORGE_TEST_DATA
#define QEFORGE_TEST_DATA "tests/data"
#endif

namespace fixtures {

namespace fs = std::filesystem;

inline std::string DataPath(const std::string& rel) {
  return std::string(QEFORGE_TEST_DATA) + "/" + rel;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("qeforge_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

inline std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream(path, std::ios::binary) << content;
}

// Line-aligned source/target files: a toy "language" where each source word
// maps to one target word, with occasional reordering so alignments are not
// trivially diagonal.
inline void WriteSyntheticParallel(const std::string& src_path,
                                   const std::string& tgt_path, size_t lines,
                                   unsigned seed) {
  static const std::vector<std::string> kSource = {
      "jib", "hakgyo", "chaek", "sagwa", "mul", "bada", "san", "gang",
      "hanul", "byeol", "dal", "hae", "namu", "kkot", "sae", "gae",
      "goyangi", "chingu", "eomma", "appa"};
  static const std::vector<std::string> kTarget = {
      "house", "school", "book", "apple", "water", "sea", "mountain", "river",
      "sky", "star", "moon", "sun", "tree", "flower", "bird", "dog",
      "cat", "friend", "mother", "father"};
  std::mt19937 rng(seed);
  std::uniform_int_distribution<size_t> len_dist(3, 12);
  std::uniform_int_distribution<size_t> word_dist(0, kSource.size() - 1);
  std::bernoulli_distribution swap_dist(0.2);
  std::ofstream src(src_path), tgt(tgt_path);
  for (size_t n = 0; n < lines; ++n) {
    const size_t len = len_dist(rng);
    std::vector<size_t> ids(len);
    for (auto& id : ids) id = word_dist(rng);
    std::vector<size_t> order(len);
    for (size_t i = 0; i < len; ++i) order[i] = i;
    for (size_t i = 0; i + 1 < len; ++i) {
      if (swap_dist(rng)) std::swap(order[i], order[i + 1]);
    }
    for (size_t i = 0; i < len; ++i) {
      src << (i ? " " : "") << kSource[ids[i]];
      tgt << (i ? " " : "") << kTarget[ids[order[i]]];
    }
    src << " .\n";
    tgt << " .\n";
  }
}

inline std::vector<std::string> Split(const std::string& line) {
  std::istringstream in(line);
  return {std::istream_iterator<std::string>(in), std::istream_iterator<std::string>()};
}

}  // namespace fixtures

#endif  // QEFORGE_TESTS_FIXTURES_H_
