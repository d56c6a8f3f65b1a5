#ifndef DDCS_TEST_UTIL_HPP
#define DDCS_TEST_UTIL_HPP

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace ddcs_test {

// Independent of the library's generator on purpose.
inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = nd(gen);
  return out;
}

inline Eigen::VectorXd gaussian_vec(Eigen::Index n, std::mt19937_64& gen) {
  return gaussian(n, 1, gen).col(0);
}

inline Eigen::MatrixXd unit_columns(Eigen::MatrixXd m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j).normalize();
  return m;
}

// Random s-sparse vector with Gaussian values on a uniform support.
inline Eigen::VectorXd sparse_vec(Eigen::Index k, int s, std::mt19937_64& gen) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), gen);
  std::normal_distribution<double> nd;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
  for (int i = 0; i < s; ++i) v[idx[i]] = nd(gen) + (nd(gen) > 0 ? 0.5 : -0.5);
  return v;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ddcs_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace ddcs_test

#endif  // DDCS_TEST_UTIL_HPP
