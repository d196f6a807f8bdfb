#pragma once

#include "zominmax/errors.hpp"
#include "zominmax/types.hpp"

namespace zominmax {

/// x = [x^1, ..., x^K], K blocks of equal dimension stored contiguously.
class BlockPoint {
 public:
  BlockPoint() = default;
  BlockPoint(Index blocks, Index block_dim) : data_(Vector::Zero(blocks * block_dim)), blocks_(blocks), block_dim_(block_dim) {
    check();
  }
  BlockPoint(Vector concatenated, Index blocks) : data_(std::move(concatenated)), blocks_(blocks) {
    if (blocks_ < 1 || data_.size() % blocks_ != 0) {
      throw ConfigError("BlockPoint: length " + std::to_string(data_.size()) +
                        " is not a multiple of block count " + std::to_string(blocks_));
    }
    block_dim_ = data_.size() / blocks_;
    check();
  }

  Index blocks() const { return blocks_; }
  Index block_dim() const { return block_dim_; }
  Index dim() const { return data_.size(); }

  auto block(Index k) { return data_.segment(k * block_dim_, block_dim_); }
  auto block(Index k) const { return data_.segment(k * block_dim_, block_dim_); }

  const Vector& concatenated() const { return data_; }
  Vector& concatenated() { return data_; }

  bool operator==(const BlockPoint& other) const {
    return blocks_ == other.blocks_ && block_dim_ == other.block_dim_ && data_ == other.data_;
  }

 private:
  void check() const {
    if (blocks_ < 1 || block_dim_ < 1) throw ConfigError("BlockPoint: need K >= 1 and d_x >= 1");
  }

  Vector data_;
  Index blocks_ = 1;
  Index block_dim_ = 0;
};

}  // namespace zominmax
