#pragma once

// Per-device DRX state machine, advanced one TTI per call.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace drx {

// Timer configuration, all durations in TTIs.
struct DrxParams {
  std::int32_t t_on{8};
  std::int32_t t_i{50};   // inactivity timer
  std::int32_t t_ss{32};  // short-cycle sleep, T_s - T_on
  std::int32_t t_ls{64};  // long-cycle sleep, T_l - T_on
  std::int32_t t_sc{1};   // number of short cycles
  bool allow_equal_cycles{false};

  std::int32_t short_cycle() const { return t_on + t_ss; }
  std::int32_t long_cycle() const { return t_on + t_ls; }

  friend bool operator==(const DrxParams& a, const DrxParams& b) {
    return a.t_on == b.t_on && a.t_i == b.t_i && a.t_ss == b.t_ss && a.t_ls == b.t_ls &&
           a.t_sc == b.t_sc;
  }
};

inline bool cycles_ordered(const DrxParams& p) {
  return p.allow_equal_cycles ? p.t_ss <= p.t_ls : p.t_ss < p.t_ls;
}

inline bool is_valid(const DrxParams& p) {
  return p.t_on >= 1 && p.t_i >= 1 && p.t_ss >= 1 && p.t_ls >= 1 && p.t_sc >= 1 && cycles_ordered(p);
}

inline void validate(const DrxParams& p) {
  if (p.t_on < 1 || p.t_i < 1 || p.t_ss < 1 || p.t_ls < 1 || p.t_sc < 1)
    throw std::invalid_argument("DRX timers must all be >= 1 TTI");
  if (!cycles_ordered(p))
    throw std::invalid_argument("DRX short cycle must be shorter than the long cycle (t_ss=" +
                                std::to_string(p.t_ss) + ", t_ls=" + std::to_string(p.t_ls) + ")");
}

enum class Mode : std::uint8_t { ActiveRx, ShortOn, ShortSleep, LongOn, LongSleep };

inline constexpr int kModeCount = 5;

inline constexpr std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::ActiveRx: return "active_rx";
    case Mode::ShortOn: return "short_on";
    case Mode::ShortSleep: return "short_sleep";
    case Mode::LongOn: return "long_on";
    case Mode::LongSleep: return "long_sleep";
  }
  return "?";
}

inline constexpr bool is_listening(Mode m) {
  return m == Mode::ActiveRx || m == Mode::ShortOn || m == Mode::LongOn;
}

inline constexpr bool is_sleeping(Mode m) { return !is_listening(m); }

// State during the TTI about to be lived. `phase_remaining` counts the TTIs
// left in the current on/sleep phase including this one; `it_remaining` is
// the same for the inactivity timer while in ActiveRx. `cycle` is the 1-based
// short-cycle index and 0 outside short cycles.
struct DeviceState {
  Mode mode{Mode::ActiveRx};
  std::int32_t cycle{0};
  std::int32_t phase_remaining{0};
  std::int32_t it_remaining{0};

  bool listening() const { return is_listening(mode); }

  friend bool operator==(const DeviceState&, const DeviceState&) = default;
};

struct TickInput {
  bool pdcch_grant{false};
  bool it_reset_indicated{false};
};

struct TickResult {
  DeviceState next;
  bool listening;
};

inline DeviceState init(const DrxParams& params) {
  return DeviceState{Mode::ActiveRx, 0, 0, params.t_i};
}

inline bool is_consistent(const DeviceState& s, const DrxParams& p) {
  switch (s.mode) {
    case Mode::ActiveRx:
      return s.cycle == 0 && s.it_remaining >= 1 && s.it_remaining <= p.t_i;
    case Mode::ShortOn:
      return s.cycle >= 1 && s.cycle <= p.t_sc && s.phase_remaining >= 1 && s.phase_remaining <= p.t_on;
    case Mode::ShortSleep:
      return s.cycle >= 1 && s.cycle <= p.t_sc && s.phase_remaining >= 1 && s.phase_remaining <= p.t_ss;
    case Mode::LongOn:
      return s.cycle == 0 && s.phase_remaining >= 1 && s.phase_remaining <= p.t_on;
    case Mode::LongSleep:
      return s.cycle == 0 && s.phase_remaining >= 1 && s.phase_remaining <= p.t_ls;
  }
  return false;
}

namespace detail {

inline DeviceState enter_active(const DrxParams& p) { return DeviceState{Mode::ActiveRx, 0, 0, p.t_i}; }

}  // namespace detail

// Advances one TTI. Grants are only observed in listening modes; a grant in
// an on-duration always reloads the inactivity timer, while in ActiveRx the
// timer is reloaded only when the reset is indicated. A reset in the TTI the
// timer would expire keeps the device active.
inline TickResult tick(const DeviceState& s, TickInput in, const DrxParams& p) {
  if (in.it_reset_indicated && !in.pdcch_grant)
    throw std::logic_error("tick: IT reset indication without a grant");
  if (!is_consistent(s, p)) throw std::logic_error("tick: device state inconsistent with DRX params");

  const bool listening = s.listening();
  DeviceState n = s;
  switch (s.mode) {
    case Mode::ActiveRx:
      if (in.pdcch_grant && in.it_reset_indicated) {
        n.it_remaining = p.t_i;
      } else if (--n.it_remaining == 0) {
        n = DeviceState{Mode::ShortOn, 1, p.t_on, 0};
      }
      break;
    case Mode::ShortOn:
      if (in.pdcch_grant) {
        n = detail::enter_active(p);
      } else if (--n.phase_remaining == 0) {
        n = DeviceState{Mode::ShortSleep, s.cycle, p.t_ss, 0};
      }
      break;
    case Mode::ShortSleep:
      if (--n.phase_remaining == 0) {
        n = s.cycle < p.t_sc ? DeviceState{Mode::ShortOn, s.cycle + 1, p.t_on, 0}
                             : DeviceState{Mode::LongOn, 0, p.t_on, 0};
      }
      break;
    case Mode::LongOn:
      if (in.pdcch_grant) {
        n = detail::enter_active(p);
      } else if (--n.phase_remaining == 0) {
        n = DeviceState{Mode::LongSleep, 0, p.t_ls, 0};
      }
      break;
    case Mode::LongSleep:
      if (--n.phase_remaining == 0) n = DeviceState{Mode::LongOn, 0, p.t_on, 0};
      break;
  }
  return {n, listening};
}

}  // namespace drx
