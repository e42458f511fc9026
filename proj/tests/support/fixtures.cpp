#include "fixtures.hpp"

namespace fixture {

binloc::GenConfig small_config(std::size_t train, std::size_t val, std::size_t test,
                               std::vector<double> rt60_s, std::vector<double> snr_db,
                               std::uint64_t seed) {
  binloc::GenConfig cfg;
  cfg.master_seed = seed;
  binloc::RoomSpec room;
  room.id = "room-5x7";
  room.dimensions = {5.0, 7.0, 3.0};
  room.array_center = {2.5, 3.5, 1.5};
  room.distances_m = {1.0, 1.5};
  room.conditions = {{std::move(rt60_s), std::move(snr_db)}};
  auto split = [&](std::size_t count, const char* head, double radius) {
    binloc::SplitSpec s;
    s.count = count;
    binloc::HeadSpec h;
    h.id = head;
    h.radius_m = radius;
    s.heads = {h};
    s.rooms = {room};
    return s;
  };
  if (train) cfg.splits.emplace_back("train", split(train, "head-a", 0.0850));
  if (val) cfg.splits.emplace_back("val", split(val, "head-b", 0.0875));
  if (test) cfg.splits.emplace_back("test", split(test, "head-c", 0.0900));
  return cfg;
}

}  // namespace fixture
