#include "rollforge/corpus.hpp"

namespace rollforge::text {

using env::GoalDirection;

namespace {

std::vector<SentencePattern> make(Split split, const std::vector<std::string>& tmpls) {
  std::vector<SentencePattern> out;
  out.reserve(tmpls.size());
  for (size_t i = 0; i < tmpls.size(); ++i)
    out.push_back({static_cast<int>(i), split, tmpls[i], std::nullopt});
  return out;
}

std::vector<SentencePattern> make_bound(Split split, const std::vector<std::string>& tmpls,
                                        const std::vector<GoalDirection>& dirs) {
  auto out = make(split, tmpls);
  for (size_t i = 0; i < out.size(); ++i) out[i].bound_direction = dirs[i];
  return out;
}

}  // namespace

const std::vector<SentencePattern>& train_patterns() {
  static const auto patterns = make(
      Split::Train,
      {
          "Can you move the {A} ball {DIR} the {B} ball?",
          "Move the {A} ball {DIR} the {B} ball.",
          "Nudge the {A} ball {DIR} the {B} ball.",
          "Please move the {A} ball {DIR} the {B} ball.",
          "Please push the {A} ball so it ends up {DIR} the {B} ball.",
          "Put the {A} ball {DIR} the {B} ball.",
          "Place the {A} ball {DIR} the {B} ball.",
          "Bring the {A} ball {DIR} the {B} ball.",
          "Roll the {A} ball until it is {DIR} the {B} ball.",
          "Shift the {A} ball {DIR} the {B} ball.",
          "Make sure the {A} ball sits {DIR} the {B} ball.",
          "I want the {A} ball {DIR} the {B} ball.",
          "I would like the {A} ball {DIR} the {B} ball.",
          "The {A} ball should be {DIR} the {B} ball.",
          "The {A} ball belongs {DIR} the {B} ball.",
          "Get the {A} ball {DIR} the {B} ball.",
          "Help me put the {A} ball {DIR} the {B} ball.",
          "Arrange for the {A} ball to rest {DIR} the {B} ball.",
      });
  return patterns;
}

const std::vector<SentencePattern>& rephrase_patterns() {
  static const auto patterns = make(
      Split::Rephrase,
      {
          // Complaints about the opposite arrangement, asking for a swap.
          "I can't stand the {A} ball {OPPDIR} the {B} one. Could you switch the positions "
          "of them?",
          "The sight of the {A} ball {OPPDIR} the {B} one bothers me. Can we reverse their "
          "order?",
          "I really dislike how the {A} ball is positioned {OPPDIR} the {B} ball. Could you "
          "exchange their places?",
          "It annoys me to see the {A} ball {OPPDIR} the {B} ball. Can we swap them around?",
          "Seeing the {A} ball {OPPDIR} the {B} ball fills me with frustration. Let's switch "
          "them.",
          "The placement of the {A} ball {OPPDIR} the {B} ball is something I detest. Can "
          "you flip them?",
          "I can't bear to see the {A} ball positioned {OPPDIR} the {B} ball. Would you mind "
          "interchanging them?",
          "It irks me to have the {A} ball come {OPPDIR} the {B} ball. Could we trade their "
          "positions?",
          "The {A} ball being {OPPDIR} the {B} ball is something I can't tolerate. Let's "
          "switch them up.",
          "It really bothers me that the {A} ball is {OPPDIR} the {B} ball. Can we swap "
          "their positions, please?",
          // Gentle movement requests.
          "Move the {A} ball gently {DIR} the {B} ball.",
          "Slowly nudge the {A} ball {DIR} the {B} ball.",
          "Push the {A} ball {DIR} the {B} ball at a leisurely pace.",
          "Slide the {A} ball {DIR} the {B} ball with a gentle touch.",
          "Gradually maneuver the {A} ball {DIR} the {B} ball.",
          "Hasten the movement of the {A} ball {DIR} the {B} ball promptly.",
          "Expeditiously maneuver the {A} ball {DIR} the {B} ball.",
          "Swiftly propel the {A} ball {DIR} the {B} ball.",
          "Urgently shift the {A} ball {DIR} the {B} ball with rapidity.",
          "Accelerate the motion of the {A} ball {DIR} the {B} ball expeditiously.",
          // Vigorous verbs over sphere/orb synonyms.
          "Push the {A} sphere {DIR} the {B} sphere.",
          "Drive the {A} orb {DIR} the {B} orb.",
          "Launch the {A} ball {DIR} the {B} one.",
          "Catapult the {A} sphere {DIR} the {B} sphere.",
          "Thrust the {A} sphere {DIR} the {B} sphere.",
          "Propel the {A}-colored orb {DIR} the {B}-colored orb.",
          "Send the {A} ball {DIR} the {B} ball.",
          "Fling the {A} sphere {DIR} the {B} sphere.",
          "Hurl the {A} ball {DIR} the {B} ball.",
          "Cast the {A} sphere {DIR} the {B} sphere.",
          // Statements of delight about the target arrangement.
          "The sight of the {A} ball positioned {DIR} the {B} ball brings me joy.",
          "It pleases me to observe the {A} ball situated {DIR} the {B} ball.",
          "Seeing the {A} ball {DIR} the {B} ball fills me with happiness.",
          "I feel delighted witnessing the {A} ball located {DIR} the {B} ball.",
          "It brings me satisfaction to see the {A} ball positioned {DIR} the {B} ball.",
          "I am happy to notice the {A} ball situated {DIR} the {B} ball.",
          "Observing the {A} ball {DIR} the {B} ball brings me contentment.",
          "I am pleased by the arrangement of the {A} ball {DIR} the {B} ball.",
          "The {A} ball being {DIR} the {B} ball gives me a sense of satisfaction.",
          "I find joy in the sight of the {A} ball being positioned {DIR} the {B} ball.",
      });
  return patterns;
}

const std::vector<SentencePattern>& unseen_easy_patterns() {
  static const auto patterns = [] {
    const std::vector<std::string> tmpls = {
        // backward
        "Move the ball backward, it's {A}.",
        "Push the {A} ball in reverse.",
        "Back up the {A} ball, please.",
        "Shift the {A} ball backwards.",
        "Can you move the {A} ball backwards?",
        "Retract the {A} ball, moving it backwards.",
        "Put the {A} ball in backward motion.",
        "Move the {A} ball back, not forward.",
        "Send the {A} ball backward, if you can.",
        "Maneuver the {A} ball to the rear.",
        "Drive the {A} ball backward, please.",
        "Pull the {A} ball back.",
        "Make the {A} ball move backwards.",
        "Shift the {A} ball rearward.",
        "Go backwards with the {A} ball.",
        "Execute a backward movement with the {A} ball.",
        "Make the {A} ball's position backward.",
        "Pull the {A} ball towards the back.",
        "Slide the {A} ball backwards.",
        "Propel the {A} ball backward, if possible.",
        // left
        "Kindly relocate the {A} sphere towards the left.",
        "Would you mind shifting the {A} orb to the left?",
        "I request that you move the {A} spherical object to the left.",
        "Could you please transfer the {A} ball towards the left?",
        "It would be appreciated if you could shift the {A} ball to the left.",
        "Please adjust the position of the {A} ball to the left.",
        "Kindly reposition the {A} ball to the left.",
        "I'd like you to move the {A} ball to the left, please.",
        "Please ensure the {A} ball is moved to the left.",
        "Could you relocate the {A} ball to the left?",
        "Please shift the {A} ball leftwards.",
        "Please slide the {A} ball over to the left.",
        "I need you to move the {A} ball leftward, please.",
        "Please nudge the {A} ball towards the left.",
        "Please push the {A} ball to the left.",
        "Would you kindly push the {A} ball towards the left?",
        "Kindly shift the {A} ball in the leftward direction.",
        "Could you move the {A} ball to the left side?",
        "It's required that you move the {A} ball towards the left.",
        "Please execute a leftward movement of the {A} ball.",
        // forward
        "Kindly shift the {A} sphere ahead.",
        "Would you mind advancing the {A} orb?",
        "Can you push the {A} ball onward?",
        "Please nudge the {A}-colored sphere ahead.",
        "Kindly relocate the {A}-colored orb forward.",
        "Would you be so kind as to move the {A}-colored ball forward?",
        "Can you shift the {A}-colored sphere ahead?",
        "Please push the {A}-hued orb onward.",
        "Kindly advance the {A}-colored ball forward.",
        "Would you mind nudging the {A} sphere ahead?",
        "Can you move the {A}-colored ball forward?",
        "Please shift the {A}-toned orb onward.",
        "Kindly relocate the {A}-hued sphere forward.",
        "Would you be so kind as to push the {A}-colored ball forward?",
        "Can you nudge the {A}-colored sphere ahead?",
        "Please move the {A}-colored orb forward.",
        "Kindly advance the {A}-hued ball forward.",
        "Would you mind shifting the {A} sphere ahead?",
        "Can you push the {A}-colored orb onward?",
        "Please nudge the {A}-hued ball forward.",
        // right
        "Kindly relocate the {A} sphere to the starboard side.",
        "Move the {A} orb towards the right.",
        "Could you shift the {A} ball to the right?",
        "I request that you move the {A} ball to the right.",
        "Please shift the {A} ball to the right.",
        "Move the ball, which is {A}, to the right.",
        "Would you mind moving the ball, which is colored {A}, to the right?",
        "Kindly relocate the spherical object of {A} hue towards the right.",
        "Can you shift the ball, which happens to be {A}, to the right?",
        "I'd appreciate it if you could move the {A} ball to the right.",
        "Please adjust the position of the {A} ball to the right.",
        "Could you possibly move the {A} ball to the right?",
        "It would be great if you could move the {A} ball to the right.",
        "Kindly transfer the {A}-colored ball to the right.",
        "Move the ball that has the color {A} to the right.",
        "Would you kindly relocate the ball, specifically the {A} one, to the right?",
        "Please make the {A} ball move to the right.",
        "Can you shift the ball that's {A} to the right?",
        "Move the ball with the {A} hue to the right, please.",
        "Could you adjust the position of the ball, specifically the one that's {A}, to the "
        "right?",
    };
    std::vector<GoalDirection> dirs;
    for (int block = 0; block < 4; ++block) {
      const GoalDirection d = block == 0   ? GoalDirection::Behind
                              : block == 1 ? GoalDirection::Left
                              : block == 2 ? GoalDirection::Front
                                           : GoalDirection::Right;
      for (int i = 0; i < 20; ++i) dirs.push_back(d);
    }
    return make_bound(Split::UnseenEasy, tmpls, dirs);
  }();
  return patterns;
}

const std::vector<SentencePattern>& hard_clause_patterns() {
  static const auto patterns = make(Split::UnseenHard,
                                    {
                                        "Push the {A} ball {DIR} the {B} ball.",
                                        "Move the {A} ball {DIR} the {B} ball.",
                                        "Keep the {A} ball {DIR} the {B} ball.",
                                        "Help me push the {A} ball {DIR} the {B} ball.",
                                        "Help me move the {A} ball {DIR} the {B} ball.",
                                        "Help me keep the {A} ball {DIR} the {B} ball.",
                                    });
  return patterns;
}

const std::vector<SentencePattern>& hard_line_patterns() {
  static const auto patterns = make(
      Split::UnseenHard,
      {
          "Place the balls horizontally, lining them up from left to right, in the order of "
          "red, blue, green, purple, and cyan.",
          "Set up the balls in a row from left to right, with red, blue, green, purple, and "
          "cyan in sequence.",
          "Arrange the balls in a line, moving from left to right, with red, blue, green, "
          "purple, and cyan.",
          "Position the balls horizontally, organizing them from left to right, following "
          "the sequence of red, blue, green, purple, and cyan.",
          "Line up the balls horizontally, sequencing them left to right as follows: red, "
          "blue, green, purple, and cyan.",
          "Order the balls in a row from left to right, with the sequence being red, blue, "
          "green, purple, and cyan.",
          "Arrange the balls in a horizontal line, starting from the left and proceeding to "
          "the right, with red, blue, green, purple, and cyan in order.",
          "Place the balls in a row horizontally, from left to right, in the sequence: red, "
          "blue, green, purple, and cyan.",
          "Set up the balls horizontally, arranging them in the order of red, blue, green, "
          "purple, and cyan from left to right.",
          "Line up the balls horizontally, sequencing them from left to right: red, blue, "
          "green, purple, and cyan.",
          "Position the balls in a horizontal row, ordering them left to right as follows: "
          "red, blue, green, purple, and cyan.",
          "Organize the balls horizontally, moving from left to right, with the sequence "
          "being red, blue, green, purple, and cyan.",
          "Place the balls in a line horizontally, arranging them from left to right, in the "
          "following order: red, blue, green, purple, and cyan.",
          "Set up the balls in a row horizontally, starting from the left and proceeding to "
          "the right, with red, blue, green, purple, and cyan in sequence.",
          "Arrange the balls in a horizontal line, sequencing them left to right as follows: "
          "red, blue, green, purple, and cyan.",
          "Order the balls in a horizontal row from left to right, with the sequence being "
          "red, blue, green, purple, and cyan.",
          "Position the balls horizontally, organizing them in the order of red, blue, "
          "green, purple, and cyan from left to right.",
          "Line up the balls horizontally, arranging them from left to right: red, blue, "
          "green, purple, and cyan.",
          "Place the balls in a horizontal row, ordering them left to right as follows: red, "
          "blue, green, purple, and cyan.",
          "Set up the balls in a row horizontally, moving from left to right, with the "
          "sequence being red, blue, green, purple, and cyan.",
      });
  return patterns;
}

const std::vector<SentencePattern>& hard_gather_patterns() {
  static const auto patterns = make(
      Split::UnseenHard,
      {
          "Position all the other balls around the {A} ball, considering it as the circle's "
          "focal point.",
          "Use the {A} ball as the nucleus of the circle, arranging the rest around it.",
          "Let the {A} ball be the anchor of the circle, and arrange the others accordingly.",
          "Make the {A} ball the center of attention in the circle and rearrange the others "
          "accordingly.",
          "Arrange all other balls around the {A} one, treating it as the hub of the circle.",
          "Centralize the circle around the {A} ball, repositioning the others accordingly.",
          "Focus the circle around the {A} ball, adjusting the positions of the others.",
          "Orient the other balls around the {A} one, treating it as the central axis of the "
          "circle.",
          "Use the {A} ball as the reference point for the circle's arrangement, positioning "
          "the others around it.",
          "Position all the other balls around the {A} ball to create the circle.",
          "Arrange the other balls around the {A} ball, making it the center of the circle.",
          "Let the {A} ball dictate the layout of the circle, with the other balls "
          "positioned around it.",
          "Create the circle with the {A} ball as the center, arranging the others "
          "accordingly.",
          "Use the {A} ball as the pivot for the circle, arranging the other balls around "
          "it.",
          "Organize the circle around the {A} ball, adjusting the positions of the other "
          "balls.",
          "Centralize the arrangement of the circle around the {A} ball, repositioning the "
          "others.",
          "Treat the {A} ball as the central node of the circle and arrange the other balls "
          "accordingly.",
          "Position all the other balls around the {A} ball, with it as the focal point of "
          "the circle.",
          "Arrange the circle with the {A} ball at the center and the others positioned "
          "around it.",
          "Base the arrangement of the circle on the {A} ball, repositioning the others "
          "accordingly.",
      });
  return patterns;
}

}  // namespace rollforge::text
