#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "vlipp/formats.hpp"

using namespace vlipp;

namespace {

FlowSequence random_flow(int n, int H, int W, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<float> u(0.0f, 5.0f);
  FlowSequence s{H, W, {}};
  for (int i = 0; i < n; ++i) {
    FlowField f = zero_flow(H, W);
    for (auto& v : f.dx.storage()) v = u(rng);
    for (auto& v : f.dy.storage()) v = u(rng);
    s.fields.push_back(f);
  }
  return s;
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::format);
    return e.what();
  }
  return "";
}

}  // namespace

TEST(FlowFormat, RoundTripAndLayout) {
  const auto s = random_flow(3, 5, 7, 1);
  const auto bytes = encode_flow(s);
  EXPECT_EQ(bytes.size(), 20u + 3 * 5 * 7 * 8);
  EXPECT_EQ(sniff(bytes), ArtifactKind::flow);
  // Little-endian header: count 3, height 5, width 7.
  EXPECT_EQ(bytes[8], 3);
  EXPECT_EQ(bytes[12], 5);
  EXPECT_EQ(bytes[16], 7);
  EXPECT_EQ(decode_flow(bytes), s);
}

TEST(FlowFormat, EmptySequence) {
  const FlowSequence s{4, 4, {}};
  EXPECT_EQ(decode_flow(encode_flow(s)), s);
}

TEST(FlowFormat, TruncationNamesByteCounts) {
  auto bytes = encode_flow(random_flow(2, 4, 4, 2));
  const auto full = bytes.size();
  bytes.resize(full - 10);
  const auto msg = error_of([&] { decode_flow(bytes); });
  EXPECT_NE(msg.find("expected " + std::to_string(full) + " bytes"), std::string::npos) << msg;
  EXPECT_NE(msg.find("got " + std::to_string(full - 10)), std::string::npos) << msg;

  bytes.resize(12);
  EXPECT_NE(error_of([&] { decode_flow(bytes); }).find("truncated"), std::string::npos);
}

TEST(FlowFormat, BadMagicAndTrailingBytes) {
  auto bytes = encode_flow(random_flow(1, 3, 3, 3));
  bytes.push_back(0);
  EXPECT_NE(error_of([&] { decode_flow(bytes); }).find("1 trailing bytes"), std::string::npos);
  bytes.pop_back();
  bytes[0] = 'X';
  EXPECT_NE(error_of([&] { decode_flow(bytes); }).find("bad magic"), std::string::npos);
  EXPECT_EQ(sniff(bytes), ArtifactKind::unknown);
}

TEST(NoiseFormat, RoundTripKeepsSeedsAndHash) {
  NoiseTensor q = degrade_to_random({3, 6, 5}, 4, 42);
  q.seed2 = 7;
  q.flow_hash = sha256(std::string("flow"));
  const auto bytes = encode_noise(q);
  EXPECT_EQ(bytes.size(), 72u + 4 * 3 * 6 * 5 * 4);
  EXPECT_EQ(sniff(bytes), ArtifactKind::noise);
  EXPECT_EQ(decode_noise(bytes), q);
}

TEST(NoiseFormat, FloatBitsPreserved) {
  NoiseTensor q;
  q.frames = q.channels = q.height = 1;
  q.width = 4;
  q.data = {-0.0f, std::numeric_limits<float>::denorm_min(), 1e38f, -3.5f};
  const auto back = decode_noise(encode_noise(q));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(std::bit_cast<std::uint32_t>(back.data[i]), std::bit_cast<std::uint32_t>(q.data[i]));
}

TEST(NoiseFormat, TruncatedAndTrailing) {
  auto bytes = encode_noise(degrade_to_random({1, 2, 2}, 2, 1));
  auto cut = bytes;
  cut.resize(40);
  EXPECT_NE(error_of([&] { decode_noise(cut); }).find("header needs"), std::string::npos);
  bytes.insert(bytes.end(), 3, 0);
  EXPECT_NE(error_of([&] { decode_noise(bytes); }).find("3 trailing bytes"), std::string::npos);
}

TEST(Files, WriteReadThroughDisk) {
  const auto dir = std::filesystem::temp_directory_path() / ("vlipp_fmt_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto s = random_flow(2, 3, 4, 9);
  write_flow_file((dir / "a.vlipf").string(), s);
  EXPECT_EQ(read_flow_file((dir / "a.vlipf").string()), s);
  const auto q = degrade_to_random({2, 3, 4}, 3, 5);
  write_noise_file((dir / "a.vlipq").string(), q);
  EXPECT_EQ(read_noise_file((dir / "a.vlipq").string()), q);
  EXPECT_THROW(read_noise_file((dir / "missing.vlipq").string()), Error);
  std::filesystem::remove_all(dir);
}
