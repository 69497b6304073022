"""The shipped 50-task customer-support benchmark, authored as code.

`build_reference_manifest` expands the row table below into a benchmark
bundle (manifest.yaml, keyword_rules.yaml, error_labels.yaml, media files).
The build is fully deterministic, so the checked-in bundle under data/ can
always be regenerated byte-for-byte.

The rows encode a calibrated design: dispatch-plan flags are chosen so the
routing telemetry of a paired run lands on the pinned per-modality counts
(40 voice / 40 image / 138 text decisions), scripted decisions pin the
paired-accuracy contingency table (15 both-correct / 11 treatment-only /
1 baseline-only / 23 both-wrong), and trigger keywords are placed in the
fixture summaries so the keyword heuristic scores 18/50 in each arm with 35
tasks answering identically. `_verify_design` re-derives every one of those
tallies from the authored strings at build time and refuses to emit a bundle
that drifted.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Union

import yaml

from . import media
from .benchmark import load_manifest

ESCALATE = "escalate_to_specialist"

KEYWORD_RULES = [
    (("drop", "damage"), "deny_warranty"),
    (("covered", "manufacturing"), "approve_warranty"),
    (("cracked", "screen"), "initiate_replacement"),
    (("missing", "screw"), "order_part"),
    (("return", "unopened"), "initiate_return"),
    (("error", "blinking"), "troubleshoot_step"),
    (("step", "diagram"), "provide_instructions"),
]

_WORD_RE = re.compile(r"[a-z0-9']+")


def _match_keywords(text: str, vocabulary: frozenset[str]) -> set[str]:
    return {w for w in _WORD_RE.findall(text.lower()) if w in vocabulary}


def _rule_action(matched: set[str]) -> str:
    for keywords, action in KEYWORD_RULES:
        if set(keywords) <= matched:
            return action
    return ESCALATE


# --- knowledge base -----------------------------------------------------------

_PRODUCTS = [
    ("P-01", "AeroBrew 300 espresso machine",
     "24 months on pump, boiler and electronics from date of purchase.",
     ["liquid ingress into the electronics bay", "descaling neglect"]),
    ("P-02", "CloudRest convertible crib",
     "36 months on frame and hardware.",
     ["aftermarket hardware", "commercial daycare use"]),
    ("P-03", "VoltEdge 14 ultrabook",
     "12 months on board, display and battery.",
     ["impact or crush events", "liquid ingress"]),
    ("P-04", "PixelOne X5 smartphone",
     "12 months on internal components and display electronics.",
     ["impact events including falls", "water exposure beyond IP rating"]),
    ("P-05", "WhirlMix stand mixer",
     "24 months on motor and gearbox.",
     ["overloading past rated capacity", "third-party attachments"]),
    ("P-06", "IronClad 10-inch skillet",
     "Lifetime on the casting; 12 months on the interior coating.",
     ["metal utensil scoring", "dishwasher cycles"]),
    ("P-07", "BrightView 27 monitor",
     "24 months on panel and power assembly, including shipping faults reported within 30 days.",
     ["impact after delivery", "burn-in from static imagery"]),
    ("P-08", "TurboVac cordless vacuum",
     "24 months on motor and electronics; 12 months on the battery pack.",
     ["filter neglect", "wet debris pickup"]),
    ("P-09", "SkyHopper camera drone",
     "12 months on flight controller and gimbal.",
     ["crash and collision events", "flight outside the companion app envelope"]),
    ("P-10", "ErgoFlex office chair",
     "60 months on frame; 24 months on moving parts.",
     ["use above the rated weight", "outdoor exposure"]),
    ("P-11", "NovaSound smart speaker",
     "12 months on drivers and electronics.",
     ["liquid exposure", "disassembly"]),
    ("P-12", "FrostLine compact refrigerator",
     "24 months on compressor and sealed system.",
     ["transport on its side without settling time", "ambient above rated class"]),
    ("P-13", "SpinCycle washing machine",
     "24 months parts and labor on drum, motor and inverter.",
     ["non-residential use", "undissolved detergent buildup"]),
    ("P-14", "TrailBlaze fitness tracker",
     "12 months on module and strap.",
     ["impact events", "charging with non-certified cables"]),
    ("P-15", "FlexShelf modular bookshelf",
     "24 months on panels and fittings.",
     ["wall anchoring not using the supplied kit", "loads above 25 kg per shelf"]),
]

_TROUBLESHOOTING = [
    ("indicator flashes twice then pauses", "troubleshoot_step",
     "Power-cycle with the filter door open, then run the reset sequence."),
    ("code E4 on the display panel", "troubleshoot_step",
     "E4 is a drainage fault; clear the trap and rerun the cycle."),
    ("no power after an electrical surge", "troubleshoot_step",
     "Hold standby for ten seconds to clear the protection latch."),
    ("wheel squeals under load", "order_part",
     "The axle bushing wears first; ship bushing kit B-114."),
    ("door seal loose at the corner", "order_part",
     "Seals are not field-repairable; ship gasket G-220."),
    ("firmware stuck mid-update", "troubleshoot_step",
     "Force recovery mode and reflash from the companion app."),
    ("companion app cannot locate the device", "provide_instructions",
     "Walk the customer through pairing reset and router band selection."),
    ("water pools under the base", "escalate_to_specialist",
     "Possible sealed-system breach; route to a field technician."),
    ("display flickers at low brightness", "troubleshoot_step",
     "Disable adaptive dimming and retest before any hardware action."),
    ("remote unresponsive after pairing", "provide_instructions",
     "Re-seat the batteries and redo the five-second hold procedure."),
]


# --- task rows ------------------------------------------------------------------
# Field legend, per row:
#   gt                  gold action
#   scripted            (treatment-arm decision, baseline-arm decision), each
#                       (action, confidence, rationale)
#   kw                  (expected keyword action treatment arm, baseline arm);
#                       verified against the authored strings at build time
#   image_route         "vision" (default) or "synthesis"
#   merge / context / extra_voice / extra_images   dispatch-plan knobs

def _d(action: str, confidence: float, rationale: str) -> dict:
    return {"action": action, "confidence": confidence, "rationale": rationale}


_ROWS: list[dict] = [
    # ---------------- product_defect (13) ----------------
    dict(
        id="defect_001", category="product_defect", gt="deny_warranty", kb=["P-04"],
        note="My PixelOne X5 stopped responding and the glass is shattered in one corner. "
             "I want this handled under coverage.",
        transcript="Hi, so, honestly the phone slipped while I was jogging. I did drop it on the "
                   "pavement and now the corner is shattered and the touch layer ignores me.",
        caption="Smartphone with shattered glass radiating from the lower left corner.",
        voice_native="Customer admits they did drop the unit on pavement while jogging; frustrated "
                     "but candid tone, medium urgency.",
        voice_transcoded="Customer reports the phone stopped responding after an outdoor incident.",
        vision_native="Physical impact damage radiating from the lower left corner; fracture "
                      "pattern is consistent with a fall onto a hard surface.",
        vision_transcoded="Photo of a smartphone with a marked lower corner.",
        scripted=(
            _d("deny_warranty", 0.88, "Voiced admission of a fall plus impact pattern matches the "
                                      "coverage exclusion for impact events."),
            _d(ESCALATE, 0.42, "Transcript and photo description are too thin to establish cause; "
                               "deferring to a human reviewer."),
        ),
        kw=("deny_warranty", ESCALATE),
    ),
    dict(
        id="defect_002", category="product_defect", gt="initiate_replacement", kb=["P-07"],
        note="Opened the BrightView box today and the panel is split from edge to edge. Never even "
             "powered it on.",
        transcript="I unboxed the monitor ten minutes ago and the panel is split corner to corner. "
                   "The foam was intact, so this happened before packing.",
        caption="Monitor panel with a diagonal fracture line, protective film still attached.",
        voice_native="Unboxing report within minutes of delivery; packaging intact, customer calm "
                     "and precise about the timeline.",
        voice_transcoded="Customer says a newly delivered monitor arrived broken.",
        vision_native="Protective film still attached over a cracked screen; fracture predates "
                      "first use, consistent with a shipping fault.",
        vision_transcoded="Photo of a monitor with the film attached.",
        scripted=(
            _d("initiate_replacement", 0.91, "Shipping fault reported inside the 30-day window "
                                             "with film still attached; replacement applies."),
            _d(ESCALATE, 0.38, "Cannot confirm the film or fracture details from the caption "
                               "grade description."),
        ),
        kw=("initiate_replacement", ESCALATE),
        extra_voice=["Quick follow-up, the serial sticker reads bravo seven four two if that helps "
                     "the claim."],
    ),
    dict(
        id="defect_003", category="product_defect", gt="order_part", kb=["P-05"],
        note="The beater arm on my WhirlMix snapped at the collar mid-batch. Mixer itself still "
             "runs fine.",
        transcript="The beater arm gave way at the collar while kneading. Motor sounds normal, "
                   "bowl is fine, I just need the arm itself.",
        caption="Stand mixer beater arm separated at the collar joint.",
        voice_native="Single component failure at the collar joint; customer explicitly asks for "
                     "the arm alone, motor confirmed healthy.",
        voice_transcoded="Customer describes a broken mixer accessory.",
        vision_native="Clean break at the collar joint; no stress marks elsewhere, the powertrain "
                      "looks untouched.",
        vision_transcoded="Photo of a kitchen mixer attachment in two pieces.",
        scripted=(
            _d("order_part", 0.84, "Isolated accessory failure; ship beater arm kit."),
            _d("provide_instructions", 0.47, "Description suggests a user-serviceable assembly; "
                                             "sending reattachment guidance."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    dict(
        id="defect_004", category="product_defect", gt="initiate_replacement", kb=["P-03"],
        note="VoltEdge lid glass split along the hinge line. It never left my desk this week.",
        transcript="There is a split running along the hinge. I did knock it once months ago, a "
                   "tiny drop onto carpet, but this line appeared on its own yesterday.",
        caption="Laptop lid with a fine fracture line parallel to the hinge.",
        voice_native="Customer mentions an old minor drop onto carpet months back, then an "
                     "unprompted split this week; believes the two are unrelated.",
        voice_transcoded="Customer says the laptop lid developed a split.",
        vision_native="Hairline damage along the hinge line of a cracked screen; stress pattern "
                      "tracks the hinge mounts, not an impact point.",
        vision_transcoded="Laptop photo, cracked area near the screen hinge.",
        scripted=(
            _d("initiate_replacement", 0.82, "Stress fracture at the hinge mounts is a known "
                                             "assembly fault covered for this model."),
            _d("troubleshoot_step", 0.40, "Asking the customer to run the panel diagnostic before "
                                          "any hardware action."),
        ),
        kw=("deny_warranty", "initiate_replacement"),
    ),
    dict(
        id="defect_005", category="product_defect", gt="deny_warranty", kb=["P-01"],
        note="AeroBrew is completely dead. It stopped mid-brew yesterday and now nothing lights up.",
        transcript="It went dark mid-brew. I will be honest, a full cup of coffee tipped over the "
                   "top housing last week, some got into the vents.",
        caption="Espresso machine with dried brown residue around the top housing vents.",
        voice_native="Customer concedes a full cup spilled into the housing vents last week before "
                     "the failure; apologetic tone.",
        voice_transcoded="Customer reports an espresso machine that no longer powers on.",
        vision_native="Dried residue tracking into the vent slots above the electronics bay; "
                      "classic liquid ingress presentation.",
        vision_transcoded="Photo of an espresso machine with staining near the vents.",
        scripted=(
            _d("deny_warranty", 0.86, "Admitted spill into the electronics bay matches the liquid "
                                      "ingress exclusion."),
            _d("approve_warranty", 0.44, "Sudden power failure inside the coverage window; no "
                                         "cause evident from the text."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    dict(
        id="defect_006", category="product_defect", gt=ESCALATE, kb=["P-06"],
        note="The IronClad skillet surface is peeling and flakes ended up in dinner. I want to "
             "know this is safe before anything else.",
        transcript="The coating is peeling off in flakes and some ended up in our food. I need to "
                   "know whether that is a health issue.",
        caption="Skillet interior with coating lifting in several patches.",
        voice_native="Customer found coating flakes in prepared food; primary concern is safety, "
                     "not a refund; anxious tone, high urgency.",
        voice_transcoded="Customer complains about a pan surface wearing off.",
        vision_native="Interior coating lifting in patches; presentation looks like a covered "
                      "manufacturing fault in the cure cycle, batch review warranted.",
        vision_transcoded="Photo of a pan with discolored patches.",
        scripted=(
            _d("initiate_replacement", 0.77, "Coating delamination on a current batch; swapping "
                                             "the unit resolves the complaint."),
            _d(ESCALATE, 0.58, "Possible ingestion complaint; route to the product safety queue."),
        ),
        kw=("approve_warranty", ESCALATE),
    ),
    dict(
        id="defect_007", category="product_defect", gt="approve_warranty", kb=["P-08"],
        note="TurboVac started whining on day nine and now cuts out after a few seconds. Filters "
             "are clean, I checked.",
        transcript="It whines, then shuts itself off after ten seconds. Nine days old, filters "
                   "cleaned, nothing wet ever went in.",
        caption="Cordless vacuum disassembled filter shown clean beside the body.",
        voice_native="Nine-day-old unit with audible bearing whine and thermal cutouts; customer "
                     "rules out the usual care issues convincingly.",
        voice_transcoded="Customer reports a vacuum that keeps shutting down.",
        vision_native="Filter is visibly clean and dry; no debris path into the motor, pointing at "
                      "an internal motor fault.",
        vision_transcoded="Photo of vacuum parts on a table.",
        scripted=(
            _d("approve_warranty", 0.85, "Early-life motor fault with care exclusions ruled out; "
                                         "claim approved."),
            _d("deny_warranty", 0.41, "Shutdowns usually trace to filter neglect; treating as a "
                                      "care issue from the description."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    dict(
        id="defect_008", category="product_defect", gt="order_part", kb=["P-10"],
        note="ErgoFlex recline stopped latching. Everything else about the chair is solid.",
        transcript="The recline will not latch anymore. It did take a hit when movers let it drop "
                   "off the truck lip, barely a few centimeters.",
        caption="Office chair mechanism with a bent latch pin visible.",
        voice_native="Movers let the chair drop a short distance; customer noticed the latch fault "
                     "immediately afterward.",
        voice_transcoded="Customer says the chair recline no longer locks.",
        vision_native="Latch pin shows bend damage; surrounding mechanism intact, pin swap would "
                      "restore function.",
        vision_transcoded="Photo of a chair mechanism close up.",
        scripted=(
            _d("initiate_replacement", 0.74, "Mechanism fault on a premium chair; swapping the "
                                             "whole unit to close the ticket quickly."),
            _d(ESCALATE, 0.36, "Cannot judge the mechanism from the description; passing to a "
                               "specialist."),
        ),
        kw=("deny_warranty", ESCALATE),
        merge=True,
    ),
    dict(
        id="defect_009", category="product_defect", gt="troubleshoot_step", kb=["P-11"],
        note="NovaSound crackles at higher volume since last week. Sounded fine before.",
        transcript="It crackles once the volume passes halfway. Started after the last firmware "
                   "push as far as I can tell.",
        caption="Smart speaker on a shelf, status ring lit.",
        voice_native="Crackle onset coincides with the latest firmware push; customer timeline is "
                     "specific and consistent.",
        voice_transcoded="Customer reports distorted speaker audio.",
        vision_native="No grille deformation or driver contact marks; looks like a cracked screen "
                      "protector left on the touch panel, otherwise clean.",
        vision_transcoded="Photo of a speaker on a shelf.",
        scripted=(
            _d("initiate_replacement", 0.69, "Audible driver distortion reported; replacing the "
                                             "unit outright."),
            _d(ESCALATE, 0.35, "Audio faults are hard to verify from text; routing onward."),
        ),
        kw=("initiate_replacement", ESCALATE),
        merge=True,
    ),
    dict(
        id="defect_010", category="product_defect", gt="provide_instructions", kb=["P-15"],
        note="FlexShelf center panel sits proud of the frame and I worry the side got cracked near "
             "the screen printing on the logo plate.",
        transcript="The center panel will not sit flush however hard I push. Maybe I assembled the "
                   "spine backwards.",
        caption="Bookshelf with one panel protruding from the frame line.",
        voice_native="Center panel proud of the frame; customer suspects a reversed spine during "
                     "assembly, which matches the symptom.",
        voice_transcoded="Customer describes a shelf panel that does not sit flush.",
        vision_native="Panel inserted with the cam locks facing outward; reseating per the manual "
                      "resolves this, no material fault visible.",
        vision_transcoded="Photo of a bookshelf with an uneven panel.",
        scripted=(
            _d("initiate_replacement", 0.66, "Panel misfit read as warped board; issuing a "
                                             "replacement panel set."),
            _d(ESCALATE, 0.33, "Ambiguous fit issue; forwarding to assembly support."),
        ),
        kw=("initiate_replacement", "initiate_replacement"),
        merge=True,
    ),
    dict(
        id="defect_011", category="product_defect", gt="initiate_replacement", kb=["P-12"],
        note="FrostLine shelf bracket shattered and the door shelf fell with everything on it.",
        transcript="The molded bracket just let go and the whole door shelf came down overnight.",
        caption="Refrigerator door shelf detached, bracket fragments on the floor.",
        voice_native="Bracket failed overnight without load changes; customer swept up fragments, "
                     "moderate urgency.",
        voice_transcoded="Customer reports a broken refrigerator shelf.",
        image_route="synthesis",
        extra_images=["Second angle of the bracket fragments beside a ruler for scale."],
        scripted=(
            _d(ESCALATE, 0.39, "Fragmented plastic with no native inspection available; sending "
                               "to a specialist with photos attached."),
            _d(ESCALATE, 0.39, "Fragmented plastic with no native inspection available; sending "
                               "to a specialist with photos attached."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    dict(
        id="defect_012", category="product_defect", gt="order_part", kb=["P-09"],
        note="SkyHopper propeller mount sheared on the front left arm. Everything else flies "
             "true on the bench check.",
        transcript="The front left mount sheared at the boss. Bench diagnostics pass, I just "
                   "need the mount assembly.",
        caption="Drone arm with a sheared propeller mount boss.",
        voice_native="Mount boss sheared; bench diagnostics pass, customer is a calm hobbyist "
                     "asking for the part number.",
        voice_transcoded="Customer reports a broken drone component.",
        image_route="synthesis",
        scripted=(
            _d(ESCALATE, 0.37, "Flight hardware with only a caption-grade view; declining to "
                               "guess the repair path."),
            _d(ESCALATE, 0.37, "Flight hardware with only a caption-grade view; declining to "
                               "guess the repair path."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    dict(
        id="defect_013", category="product_defect", gt="deny_warranty", kb=["P-14"],
        note="TrailBlaze face smashed. Fine, I did drop it on concrete at the gym, the damage is "
             "obvious, but twelve months should mean something.",
        transcript="Look, it slipped off my wrist onto concrete at the gym and the face smashed. "
                   "I still think a tracker should survive that.",
        caption="Fitness tracker with a smashed face, strap intact.",
        voice_native="Customer openly recounts the concrete fall at the gym; indignant but honest, "
                     "wants the coverage terms explained.",
        voice_transcoded="Customer reports a broken fitness tracker and is unhappy about it.",
        image_route="synthesis",
        scripted=(
            _d(ESCALATE, 0.45, "Emotive claim with an admitted fall but no native inspection; "
                               "handing to retention staff."),
            _d(ESCALATE, 0.45, "Emotive claim with an admitted fall but no native inspection; "
                               "handing to retention staff."),
        ),
        kw=("deny_warranty", "deny_warranty"),
    ),
    # ---------------- assembly_guidance (12) ----------------
    dict(
        id="assembly_001", category="assembly_guidance", gt="provide_instructions", kb=["P-02"],
        note="CloudRest side rails look identical but the manual implies they are not. Which goes "
             "on the window side?",
        transcript="Both rails look the same to me. Is there a left and a right? The little arrow "
                   "stickers fell off.",
        voice_native="Rails lost their orientation stickers; customer needs the left-right "
                     "distinction and is otherwise on track.",
        voice_transcoded="Customer asks about crib rail orientation.",
        scripted=(
            _d("provide_instructions", 0.83, "Orientation question; sending the rail marking "
                                             "guide with photos."),
            _d(ESCALATE, 0.34, "Cannot tell which component is meant; assigning to a human."),
        ),
        kw=(ESCALATE, ESCALATE),
        context=("voice",),
    ),
    dict(
        id="assembly_002", category="assembly_guidance", gt="provide_instructions", kb=["P-15"],
        note="FlexShelf panels came in three finishes and the build order matters apparently?",
        transcript="At which step do the darker panels go in? The diagram on page four is the one "
                   "I cannot make sense of.",
        voice_native="Customer is stuck at a specific step and cites the page four diagram; needs "
                     "the panel order clarified.",
        voice_transcoded="Customer asks at which step the dark panels mount, citing the page "
                         "four diagram.",
        scripted=(
            _d("provide_instructions", 0.86, "Direct how-to about panel ordering; sending the "
                                             "annotated sequence."),
            _d("provide_instructions", 0.79, "How-to about panel ordering; sending the standard "
                                             "sequence sheet."),
        ),
        kw=("provide_instructions", "provide_instructions"),
        context=("voice",),
    ),
    dict(
        id="assembly_003", category="assembly_guidance", gt="provide_instructions", kb=["P-02"],
        note="Need the correct mattress height for a newborn on the CloudRest crib before our "
             "daughter arrives this weekend.",
        transcript="We are setting up the CloudRest crib. Which mattress height is the newborn "
                   "setting, and at which step do I lock the base? The diagram numbering confused "
                   "me.",
        voice_native="Expectant parent assembling the CloudRest crib asks for the newborn mattress "
                     "height, referencing a specific step and the base-lock diagram; time "
                     "pressure is real but manageable.",
        voice_transcoded="Customer asks about furniture setup heights.",
        scripted=(
            _d("provide_instructions", 0.9, "Crib newborn height is position one plus the base "
                                            "lock; sending the illustrated walkthrough."),
            _d(ESCALATE, 1.0, "Matched the height query to the FlexShelf bracket chart; product "
                              "context unclear, assigning to a specialist."),
        ),
        kw=("provide_instructions", ESCALATE),
    ),
    dict(
        id="assembly_004", category="assembly_guidance", gt="order_part", kb=["P-10"],
        note="ErgoFlex armrest bag was light. I count four bolts where the sheet says six.",
        transcript="The armrest hardware bag has a missing screw, actually two. I checked the foam "
                   "twice.",
        voice_native="Hardware shortfall confirmed twice: a missing screw pair from the armrest "
                     "bag; customer counted against the sheet.",
        voice_transcoded="Hardware count short per the customer: a missing screw pair from the "
                         "armrest bag.",
        scripted=(
            _d("order_part", 0.88, "Confirmed hardware shortage; shipping the armrest bolt kit."),
            _d("order_part", 0.76, "Reported hardware shortage; shipping the armrest bolt kit."),
        ),
        kw=("order_part", "order_part"),
    ),
    dict(
        id="assembly_005", category="assembly_guidance", gt="troubleshoot_step", kb=["P-13"],
        note="New SpinCycle installed but the drum will not turn by hand. Did I miss something?",
        transcript="Everything is hooked up yet the drum is rigid. There is a thing about shipping "
                   "bolts somewhere?",
        voice_native="Drum locked after install; the manual's step nine diagram covers the "
                     "shipping bolt removal the customer likely skipped.",
        voice_transcoded="Drum locked after install; panel reportedly shows an error glyph and a "
                         "blinking lid light.",
        scripted=(
            _d("troubleshoot_step", 0.87, "Transit bolts almost certainly still fitted; walking "
                                          "the removal check."),
            _d("troubleshoot_step", 0.7, "Locked drum on a fresh install; running the transit "
                                         "bolt check."),
        ),
        kw=("provide_instructions", "troubleshoot_step"),
    ),
    dict(
        id="assembly_006", category="assembly_guidance", gt="provide_instructions", kb=["P-09"],
        note="Do the SkyHopper prop guards mount above or below the arms? Manual art is ambiguous.",
        transcript="The guards clip on two ways and both feel secure. Which one is right before I "
                   "fly this thing?",
        voice_native="Guard orientation question before first flight; customer is cautious and "
                     "double-checking rather than stuck.",
        voice_transcoded="Customer asks how drone guards attach.",
        scripted=(
            _d("provide_instructions", 0.84, "Orientation how-to; guards mount beneath the arms, "
                                             "sending the photo guide."),
            _d("provide_instructions", 0.59, "Mounting how-to; sending the guard fitting "
                                             "sheet."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    dict(
        id="assembly_007", category="assembly_guidance", gt="order_part", kb=["P-15"],
        note="FlexShelf anchor kit is short. Two anchors, one missing screw, and the wall plate "
             "never made it into the box.",
        transcript="The anchor pouch rattles half empty. I am not hanging shelves without the full "
                   "kit.",
        voice_native="Anchor kit shipped incomplete; customer refuses to mount without the full "
                     "set, reasonably so.",
        voice_transcoded="Customer reports an incomplete hardware pouch.",
        scripted=(
            _d("order_part", 0.89, "Safety-critical anchoring shortage; shipping the complete "
                                   "anchor kit."),
            _d("order_part", 0.72, "Incomplete pouch; shipping the anchor kit."),
        ),
        kw=("order_part", "order_part"),
    ),
    dict(
        id="assembly_008", category="assembly_guidance", gt="provide_instructions", kb=["P-02"],
        note="Crib assembled but it wobbles side to side. All fasteners feel tight.",
        transcript="It sways maybe a centimeter at the top rail. Everything is torqued like the "
                   "sheet says.",
        voice_native="Post-build sway at the top rail with fasteners torqued; the cross-brace "
                     "sequencing note usually fixes this.",
        voice_transcoded="Customer reports a wobbly crib after assembly.",
        scripted=(
            _d("troubleshoot_step", 0.61, "Running the joint-by-joint torque audit before "
                                          "anything else."),
            _d("troubleshoot_step", 0.57, "Running the torque audit."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    dict(
        id="assembly_009", category="assembly_guidance", gt="troubleshoot_step", kb=["P-01"],
        note="First brew attempt and the AeroBrew pump just hums. Water tank is full.",
        transcript="The pump hums but nothing moves. The panel shows an error and the ready light "
                   "keeps blinking at me.",
        voice_native="Pump hums dry on first run with an error glyph and blinking ready light; "
                     "textbook unprimed-circuit presentation.",
        voice_transcoded="Pump hums on first run; customer mentions an error light blinking on "
                         "the panel.",
        scripted=(
            _d("provide_instructions", 0.64, "Sending the full first-run setup walkthrough."),
            _d("provide_instructions", 0.6, "Sending the first-run setup sheet."),
        ),
        kw=("troubleshoot_step", "troubleshoot_step"),
    ),
    dict(
        id="assembly_010", category="assembly_guidance", gt="provide_instructions", kb=["P-10"],
        note="How do I set the ErgoFlex recline tension for someone around 55 kg? Factory setting "
             "slams back.",
        transcript="The recline throws my daughter back the moment she leans. Where is the tension "
                   "adjustment and how far should I spin it?",
        voice_native="Tension set for a heavier user; customer needs the knob location and the "
                     "per-weight guidance.",
        voice_transcoded="Customer asks about chair recline adjustment.",
        scripted=(
            _d(ESCALATE, 0.41, "Reads like a mechanism fault; sending to the chair desk."),
            _d(ESCALATE, 0.41, "Reads like a mechanism fault; sending to the chair desk."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    dict(
        id="assembly_011", category="assembly_guidance", gt="order_part", kb=["P-07"],
        note="Stand bolt head stripped while assembling the BrightView. Also the status LED keeps "
             "blinking an error pattern, if that matters.",
        transcript="The hex head rounded off halfway in. I stopped before forcing it further.",
        voice_native="Bolt head rounded mid-insert; customer stopped correctly and needs the "
                     "hardware pack.",
        voice_transcoded="Customer stripped a bolt during monitor assembly.",
        scripted=(
            _d("initiate_replacement", 0.52, "Treating the stripped fastener as stand damage and "
                                             "swapping the stand assembly."),
            _d("initiate_replacement", 0.5, "Swapping the stand assembly."),
        ),
        kw=("troubleshoot_step", "troubleshoot_step"),
    ),
    dict(
        id="assembly_012", category="assembly_guidance", gt="provide_instructions", kb=["P-12"],
        note="Want to reverse the FrostLine door to open leftward. Is that user-doable?",
        transcript="The kitchen layout needs the door opening the other way. The manual hints it "
                   "is possible but skips the how.",
        voice_native="Door reversal request; fully user-doable with the hinge kit walkthrough, "
                     "customer sounds handy.",
        voice_transcoded="Customer asks about changing a fridge door.",
        scripted=(
            _d("troubleshoot_step", 0.48, "Running the door alignment check sequence."),
            _d("troubleshoot_step", 0.45, "Running the door alignment check."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    # ---------------- visual_troubleshooting (12) ----------------
    dict(
        id="visual_001", category="visual_troubleshooting", gt="troubleshoot_step", kb=["P-13"],
        note="SpinCycle stopped mid-cycle and the panel is flashing a pattern at me. Photo "
             "attached.",
        caption="Washer control panel with two segments lit and the lid lamp flashing.",
        vision_native="Panel shows the E4 error pattern with the lid lamp blinking twice per "
                      "second; drainage fault signature, clear and readable.",
        vision_transcoded="Photo of a washer control panel with some lights on.",
        scripted=(
            _d("troubleshoot_step", 0.89, "E4 drainage signature confirmed from the panel; "
                                          "walking the trap-clearing sequence."),
            _d(ESCALATE, 0.4, "Panel state unclear from the description; assigning out."),
        ),
        kw=("troubleshoot_step", ESCALATE),
    ),
    dict(
        id="visual_002", category="visual_troubleshooting", gt="initiate_replacement", kb=["P-04"],
        note="A thin line appeared across my PixelOne display overnight. No fall, no pressure, it "
             "lives in a case.",
        caption="Smartphone display with a thin vertical line of dead pixels.",
        vision_native="Internally cracked screen lamination with a dead pixel column; no external "
                      "point of force, consistent with a panel bond fault.",
        vision_transcoded="Photo of a phone display with a line on it.",
        scripted=(
            _d("initiate_replacement", 0.85, "Panel bond fault without external force; covered "
                                             "swap."),
            _d("troubleshoot_step", 0.39, "Asking for a pixel-refresh run before hardware "
                                          "action."),
        ),
        kw=("initiate_replacement", ESCALATE),
    ),
    dict(
        id="visual_003", category="visual_troubleshooting", gt="troubleshoot_step", kb=["P-07"],
        note="BrightView shows colored noise in the lower third some mornings. Picture of the "
             "worst of it attached.",
        caption="Monitor displaying colored noise across the lower third with an error readout "
                "and a blinking source indicator.",
        vision_native="What looks like a hairline cracked strip near the screen edge is actually "
                      "compression noise; lower-third artifacting tracks the cable, not the "
                      "panel.",
        vision_transcoded="Monitor photo showing noise, an error readout and a blinking source "
                          "light.",
        scripted=(
            _d("troubleshoot_step", 0.81, "Artifacting follows the source cable; running the "
                                          "cable-swap check first."),
            _d("troubleshoot_step", 0.66, "Noise plus source indicator points at the cable; "
                                          "running the swap check."),
        ),
        kw=("initiate_replacement", "troubleshoot_step"),
    ),
    dict(
        id="visual_004", category="visual_troubleshooting", gt="troubleshoot_step", kb=["P-08"],
        note="TurboVac dock flashes at me and refuses to charge. Lights pictured.",
        caption="Vacuum dock with the charge lamp flashing amber.",
        vision_native="Dock charge lamp blinking amber in the contact-error cadence; contacts "
                      "visibly dusty in the frame.",
        vision_transcoded="Dock photo with an amber light blinking; possible contact error per "
                          "the pattern chart.",
        scripted=(
            _d("troubleshoot_step", 0.86, "Contact-error cadence confirmed; walking the contact "
                                          "cleaning procedure."),
            _d("troubleshoot_step", 0.68, "Amber blink suggests contact fault; walking the "
                                          "cleaning procedure."),
        ),
        kw=("troubleshoot_step", "troubleshoot_step"),
    ),
    dict(
        id="visual_005", category="visual_troubleshooting", gt="provide_instructions", kb=["P-15"],
        note="Which bracket orientation is correct for the FlexShelf corner join? Photo of my "
             "attempt attached.",
        caption="Shelf corner with a bracket held against the join, arrow sticker visible.",
        vision_native="Bracket held mirrored against the corner; the step five diagram orientation "
                      "applies, arrow should face the wall side.",
        vision_transcoded="Corner bracket photo; matches the step five diagram with the arrow "
                          "toward the wall.",
        scripted=(
            _d("provide_instructions", 0.87, "Orientation confirmed from the photo; sending the "
                                             "corner-join sequence."),
            _d("provide_instructions", 0.71, "Sending the corner-join sequence sheet."),
        ),
        kw=("provide_instructions", "provide_instructions"),
    ),
    dict(
        id="visual_006", category="visual_troubleshooting", gt="troubleshoot_step", kb=["P-12"],
        note="FrostLine panel shows an error glyph and the temp readout is blinking. Photo "
             "attached, food at risk.",
        caption="Refrigerator control panel with a glyph lit and the temperature readout flashing.",
        vision_native="Panel glyph with flashing temperature readout; ambient-recovery state after "
                      "a door left ajar, compressor sounds are not implicated.",
        vision_transcoded="Fridge panel photo with a warning glyph flashing.",
        scripted=(
            _d("troubleshoot_step", 0.84, "Ambient-recovery signature; running the door-seal and "
                                          "reset sequence."),
            _d("troubleshoot_step", 0.67, "Warning glyph after a likely door event; running the "
                                          "reset sequence."),
        ),
        kw=("troubleshoot_step", "troubleshoot_step"),
    ),
    dict(
        id="visual_007", category="visual_troubleshooting", gt="initiate_replacement", kb=["P-06"],
        note="Gap opened between the IronClad handle and the body. Seems to grow each wash.",
        caption="Skillet handle junction with a visible gap at the rivet line.",
        vision_native="Rivet line separation at the handle junction; progressive and structural, "
                      "not serviceable in the field.",
        vision_transcoded="Photo of a pan handle area.",
        scripted=(
            _d("initiate_replacement", 0.83, "Structural separation at the rivet line; swap the "
                                             "unit."),
            _d("initiate_replacement", 0.62, "Progressive handle gap reported; swap the unit."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    dict(
        id="visual_008", category="visual_troubleshooting", gt="troubleshoot_step", kb=["P-13"],
        note="SpinCycle door light blinks in pairs and the handle refuses to release. Photo of "
             "the latch area attached.",
        caption="Washer door latch area, indicator beside the handle lit.",
        vision_native="Paired blinking on the latch indicator is the interlock error cadence; "
                      "thermal lock release procedure applies.",
        vision_transcoded="Latch photo; paired blinking matches the interlock error cadence per "
                          "the chart.",
        scripted=(
            _d("troubleshoot_step", 0.88, "Interlock thermal lock confirmed; walking the release "
                                          "procedure."),
            _d("troubleshoot_step", 0.69, "Interlock error cadence; walking the release "
                                          "procedure."),
        ),
        kw=("troubleshoot_step", "troubleshoot_step"),
    ),
    dict(
        id="visual_009", category="visual_troubleshooting", gt="troubleshoot_step", kb=["P-01"],
        note="AeroBrew shows the orange droplet symbol. Photo attached, machine still brews.",
        caption="Espresso machine panel with the droplet error symbol lit and the scale lamp "
                "blinking.",
        image_route="synthesis",
        scripted=(
            _d("troubleshoot_step", 0.8, "Droplet symbol with scale lamp is the descale "
                                         "reminder; walking the descale run."),
            _d("troubleshoot_step", 0.8, "Droplet symbol with scale lamp is the descale "
                                         "reminder; walking the descale run."),
        ),
        kw=("troubleshoot_step", "troubleshoot_step"),
    ),
    dict(
        id="visual_010", category="visual_troubleshooting", gt="provide_instructions", kb=["P-02"],
        note="Does this rail pin arrangement look right? Following the booklet but unsure.",
        caption="Crib rail pin layout photographed next to the step three diagram page.",
        image_route="synthesis",
        scripted=(
            _d("provide_instructions", 0.78, "Pin layout matches the booklet; sending the "
                                             "annotated confirmation and next moves."),
            _d("provide_instructions", 0.78, "Pin layout matches the booklet; sending the "
                                             "annotated confirmation and next moves."),
        ),
        kw=("provide_instructions", "provide_instructions"),
    ),
    dict(
        id="visual_011", category="visual_troubleshooting", gt="troubleshoot_step", kb=["P-09"],
        note="SkyHopper controller LEDs pictured. It refuses to bind to the drone since "
             "yesterday.",
        caption="Drone controller with the bind error pattern showing and the link lamp "
                "blinking.",
        image_route="synthesis",
        scripted=(
            _d("troubleshoot_step", 0.76, "Bind error pattern on the controller; walking the "
                                          "re-pair sequence."),
            _d("troubleshoot_step", 0.76, "Bind error pattern on the controller; walking the "
                                          "re-pair sequence."),
        ),
        kw=("troubleshoot_step", "troubleshoot_step"),
    ),
    dict(
        id="visual_012", category="visual_troubleshooting", gt="initiate_return", kb=["P-11"],
        note="Ordered the graphite NovaSound, received the chalk one. Photo attached. I just want "
             "to send it back.",
        caption="Smart speaker in chalk white, status display showing a pairing error glyph and "
                "a blinking ring.",
        image_route="synthesis",
        scripted=(
            _d("troubleshoot_step", 0.54, "Pairing error visible on the display; walking the "
                                          "pairing reset first."),
            _d("troubleshoot_step", 0.54, "Pairing error visible on the display; walking the "
                                          "pairing reset first."),
        ),
        kw=("troubleshoot_step", "troubleshoot_step"),
    ),
    # ---------------- warranty_claim (13) ----------------
    dict(
        id="warranty_001", category="warranty_claim", gt="deny_warranty", kb=["P-04"],
        note="Filing a claim on my PixelOne X5. Display went dark this weekend.",
        transcript="The display died Saturday. OK, full story, I did drop it getting out of the "
                   "car Friday night, but it worked fine for a whole day after.",
        caption="Smartphone back panel with corner denting and spider lines.",
        voice_native="Customer volunteers that they did drop the phone the night before the "
                     "failure; timeline links the two despite the one-day gap.",
        voice_transcoded="Customer files a claim about a dark phone display.",
        vision_native="Corner impact damage with spider lines from the same point; force event is "
                      "unambiguous.",
        vision_transcoded="Photo of the back of a phone.",
        scripted=(
            _d("deny_warranty", 0.87, "Admitted fall plus matching impact evidence engages the "
                                      "impact exclusion."),
            _d(ESCALATE, 0.43, "Claim narrative incomplete in text form; routing to a human "
                               "adjuster."),
        ),
        kw=("deny_warranty", ESCALATE),
    ),
    dict(
        id="warranty_002", category="warranty_claim", gt="approve_warranty", kb=["P-05"],
        note="WhirlMix gearbox grinds in every gear, eleven months in. Claim paperwork started "
             "online, reference WM-5521.",
        transcript="It grinds in all gears under any load. Eleven months old, home use only, "
                   "original attachments.",
        caption="Stand mixer head tilted back showing the gearbox housing.",
        voice_native="Grinding across all gears at eleven months, home use, original attachments; "
                     "clean claim narrative.",
        voice_transcoded="Customer claims a mixer gearbox fault.",
        vision_native="No abuse indicators on the housing; wear pattern consistent with an "
                      "internal gear fault.",
        vision_transcoded="Photo of a mixer with the head tilted.",
        scripted=(
            _d("approve_warranty", 0.84, "In-window gearbox fault with no abuse indicators; "
                                         "approving."),
            _d("approve_warranty", 0.61, "In-window gearbox fault per the narrative; approving."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    dict(
        id="warranty_003", category="warranty_claim", gt="approve_warranty", kb=["P-03"],
        note="VoltEdge battery bulged enough to lift the trackpad. Stopped using it immediately.",
        transcript="The trackpad started lifting and the case will not sit flat. I did drop by "
                   "the service kiosk but they just told me to file here.",
        caption="Laptop with a visibly lifted trackpad and case seam.",
        voice_native="Trackpad lift with case flex; customer mentions they did drop by a kiosk "
                     "first, no fall event anywhere in the account.",
        voice_transcoded="Battery swelling reported; a covered manufacturing fault class for this "
                         "model line.",
        vision_native="Swelling-pattern case damage, lifted trackpad, seam separation; no impact "
                      "marks anywhere.",
        vision_transcoded="Photo of a laptop on a desk.",
        scripted=(
            _d(ESCALATE, 0.49, "Battery swelling claims require the hazard-handling queue per "
                               "policy."),
            _d(ESCALATE, 0.49, "Battery swelling claims require the hazard-handling queue per "
                               "policy."),
        ),
        kw=("deny_warranty", "approve_warranty"),
        merge=True,
    ),
    dict(
        id="warranty_004", category="warranty_claim", gt="approve_warranty", kb=["P-01"],
        note="AeroBrew boiler takes five minutes to heat now, was forty seconds new. Ten months "
             "old. Claim ref AB-2213.",
        transcript="Heat-up went from under a minute to five. Descaled on schedule, logs in the "
                   "app prove it.",
        caption="Espresso machine with the app maintenance log on a phone beside it.",
        voice_native="Heat-up regression with documented descale history in the app; customer "
                     "prepared and cooperative.",
        voice_transcoded="Customer claims a slow espresso machine.",
        vision_native="App log frame shows on-schedule descales; neglect exclusion does not "
                      "apply.",
        vision_transcoded="Photo of a coffee machine and a phone.",
        scripted=(
            _d(ESCALATE, 0.46, "Thermal faults need bench confirmation before approval per the "
                               "claims playbook."),
            _d(ESCALATE, 0.46, "Thermal faults need bench confirmation before approval per the "
                               "claims playbook."),
        ),
        kw=(ESCALATE, ESCALATE),
        merge=True,
        extra_voice=["Adding the claim reference aloud for the record: alpha bravo two two one "
                     "three."],
    ),
    dict(
        id="warranty_005", category="warranty_claim", gt="approve_warranty", kb=["P-08"],
        note="TurboVac battery lasts eight minutes from a full charge. It managed forty when new. "
             "Fourteen months old.",
        transcript="Runtime collapsed to eight minutes. I know the battery window is twelve "
                   "months, but the collapse started inside it, I reported in month eleven.",
        caption="Vacuum battery gauge photographed at full, then at cutoff eight minutes later.",
        voice_native="Runtime collapse first reported in month eleven, inside the battery window; "
                     "the earlier ticket anchors eligibility.",
        voice_transcoded="Customer claims a weak vacuum battery.",
        vision_native="Gauge pair documents the eight-minute collapse cleanly.",
        vision_transcoded="Two photos of a battery gauge.",
        scripted=(
            _d(ESCALATE, 0.44, "Cross-window eligibility call; pushing to claims review."),
            _d(ESCALATE, 0.44, "Cross-window eligibility call; pushing to claims review."),
        ),
        kw=(ESCALATE, ESCALATE),
        merge=True,
    ),
    dict(
        id="warranty_006", category="warranty_claim", gt="approve_warranty", kb=["P-13"],
        note="SpinCycle bearing roar on spin is back, third ticket this year. I want it resolved "
             "under the claim this time.",
        transcript="Same roar, third time. Your tech replaced the seal twice. I am done with "
                   "patch visits.",
        caption="Washer drum interior, wear ring visible around the hub.",
        voice_native="Third recurrence after two seal visits; repeat-repair clause applies and "
                     "the customer knows it.",
        voice_transcoded="Customer is unhappy about a recurring washer noise.",
        vision_native="Hub wear ring after two seal replacements corroborates a bearing-race "
                      "fault, not another seal.",
        vision_transcoded="Photo of the inside of a washer drum.",
        scripted=(
            _d(ESCALATE, 0.48, "Repeat-repair escalation path mandated after two visits."),
            _d(ESCALATE, 0.48, "Repeat-repair escalation path mandated after two visits."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    dict(
        id="warranty_007", category="warranty_claim", gt="deny_warranty", kb=["P-09"],
        note="SkyHopper gimbal died mid-flight and the landing bent a leg. Filing under the "
             "twelve month coverage.",
        transcript="I maintain it by the book and this model is covered for manufacturing faults, "
                   "right? The gimbal cut out on its own, the rough landing came after.",
        caption="Drone on grass with a bent landing leg and tilted gimbal.",
        voice_native="Customer leads with the covered manufacturing-fault clause and insists the "
                     "gimbal cut out before the landing; sequence is asserted, not evidenced.",
        voice_transcoded="Flight log recap: manual override engaged, then a drop of sixty meters "
                         "uncontrolled.",
        vision_native="Gimbal tilt and leg bend pattern matches a hard landing; no evidence "
                      "separating cause from effect.",
        vision_transcoded="Impact damage across the gimbal and leg per the log summary.",
        scripted=(
            _d(ESCALATE, 0.47, "Flight telemetry needed to order cause and effect; claims "
                               "review."),
            _d(ESCALATE, 0.47, "Flight telemetry needed to order cause and effect; claims "
                               "review."),
        ),
        kw=("approve_warranty", "deny_warranty"),
    ),
    dict(
        id="warranty_008", category="warranty_claim", gt="deny_warranty", kb=["P-04"],
        note="PixelOne charging port corroded green inside. Filing a materials claim.",
        transcript="The port turned green and crusty. Yes it came to the beach all summer, phones "
                   "should handle that.",
        caption="Phone charging port with green corrosion residue inside.",
        voice_native="Season of beach exposure conceded; corrosion claim framed as a materials "
                     "fault anyway.",
        voice_transcoded="Customer files a claim about a corroded port.",
        vision_native="Salt-type corrosion bloom inside the port; environmental exposure "
                      "signature, outside coverage.",
        vision_transcoded="Photo of a phone connector.",
        scripted=(
            _d(ESCALATE, 0.45, "Corrosion source needs lab confirmation per the claims "
                               "playbook."),
            _d(ESCALATE, 0.45, "Corrosion source needs lab confirmation per the claims "
                               "playbook."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    dict(
        id="warranty_009", category="warranty_claim", gt="deny_warranty", kb=["P-10"],
        note="ErgoFlex cylinder sinks under me during the day. Claiming under the five year "
             "frame terms.",
        transcript="It sinks an inch every hour. I am two meters tall and the chair is rated "
                   "generously, surely.",
        caption="Office chair at lowest position beside its height lever.",
        voice_native="Cylinder sink with the customer above the rated load by their own numbers; "
                     "frame terms do not cover the cylinder anyway.",
        voice_transcoded="Customer claims a sinking chair.",
        vision_native="Cylinder fully compressed; wear consistent with sustained over-rating "
                      "use.",
        vision_transcoded="Photo of an office chair.",
        scripted=(
            _d(ESCALATE, 0.42, "Load-rating dispute; claims review owns these."),
            _d(ESCALATE, 0.42, "Load-rating dispute; claims review owns these."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    dict(
        id="warranty_010", category="warranty_claim", gt="initiate_return", kb=["P-11"],
        note="NovaSound is fine, honestly. It is just bigger than the shelf I bought it for. "
             "Can we call this a claim and sort it out?",
        transcript="Nothing is wrong with it. I measured badly, it will not fit, and I did drop "
                   "hints to your chat bot about store credit already.",
        caption="Smart speaker overhanging a narrow shelf edge.",
        voice_native="No fault at all; sizing mistake framed as a claim, customer mentions they "
                     "did drop hints about store credit, speaker risk of shelf damage noted in "
                     "passing.",
        voice_transcoded="Customer asks about sending back a speaker; mentions the covered "
                         "fault list.",
        vision_native="Unit overhangs the shelf; no product fault visible anywhere, pure fit "
                      "problem with damage risk if it stays.",
        vision_transcoded="Speaker photo; manufacturing condition appears unremarkable.",
        scripted=(
            _d(ESCALATE, 0.4, "Not a fault claim; handing to order services."),
            _d(ESCALATE, 0.4, "Not a fault claim; handing to order services."),
        ),
        kw=("deny_warranty", "approve_warranty"),
    ),
    dict(
        id="warranty_011", category="warranty_claim", gt="initiate_return", kb=["P-07"],
        note="Bought the BrightView for color work; the gamut is narrower than advertised for my "
             "use. Nine days in, box kept.",
        transcript="It is a fine monitor, just not the gamut I need. Nine days, box and film "
                   "kept, I would rather swap toward the pro model.",
        caption="Monitor on a desk showing a color calibration pattern.",
        voice_native="Nine-day-old unit, packaging kept, customer wants an exchange path toward "
                     "the pro model; zero fault language.",
        voice_transcoded="Customer is unsatisfied with a recently bought monitor.",
        image_route="synthesis",
        extra_images=["Close-up of the calibration report sheet beside the monitor base."],
        scripted=(
            _d(ESCALATE, 0.38, "Preference-driven request mixed with claim language; handing "
                               "off."),
            _d(ESCALATE, 0.38, "Preference-driven request mixed with claim language; handing "
                               "off."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    dict(
        id="warranty_012", category="warranty_claim", gt="initiate_replacement", kb=["P-12"],
        note="FrostLine compressor cycles every ninety seconds and food thawed overnight. "
             "Eighteen months old, claim ref FL-0907.",
        transcript="It clicks on and off every minute or two and everything thawed. I moved it "
                   "upright, waited the full day before plugging in, did everything right.",
        caption="Refrigerator with door open, thermometer reading twelve degrees.",
        voice_native="Short-cycling compressor with correct transport handling recounted "
                     "unprompted; strong covered-fault candidate inside the sealed-system "
                     "window.",
        voice_transcoded="Customer claims a fridge that does not cool.",
        image_route="synthesis",
        scripted=(
            _d(ESCALATE, 0.43, "Sealed-system diagnosis needs a technician reading; claims "
                               "review."),
            _d(ESCALATE, 0.43, "Sealed-system diagnosis needs a technician reading; claims "
                               "review."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
    dict(
        id="warranty_013", category="warranty_claim", gt="order_part", kb=["P-06"],
        note="IronClad lid knob sheared off at the thread. Pan and lid glass are perfect "
             "otherwise. Claiming the knob under lifetime terms.",
        transcript="Just the knob, it sheared at the thread. The casting terms are lifetime so I "
                   "assume a knob is nothing.",
        caption="Pan lid with the knob detached, threaded stub remaining.",
        voice_native="Knob sheared at the thread; customer correctly scopes the ask to the "
                     "single part under the lifetime casting terms.",
        voice_transcoded="Customer claims a broken pan lid part.",
        image_route="synthesis",
        scripted=(
            _d(ESCALATE, 0.41, "Lifetime-terms interpretation involved; claims review takes "
                               "these."),
            _d(ESCALATE, 0.41, "Lifetime-terms interpretation involved; claims review takes "
                               "these."),
        ),
        kw=(ESCALATE, ESCALATE),
    ),
]

_PRIORITY_BY_CATEGORY = {
    "product_defect": 3,
    "warranty_claim": 3,
    "visual_troubleshooting": 2,
    "assembly_guidance": 1,
}

# Analysis sub-tasks that carry the customer's note as a context part: every
# defect and warranty voice analysis, plus two assembly tasks = 28 attachments.
_CONTEXT_DEFAULTS = {"product_defect": ("voice",), "warranty_claim": ("voice",)}

_ERROR_LABELS: dict[str, dict[str, str]] = {}
for _tid in [f"warranty_{i:03d}" for i in range(3, 14)]:
    _ERROR_LABELS[_tid] = {"failure_mode": "policy_lookup_failure", "layer": "reasoning"}
for _tid in [f"assembly_{i:03d}" for i in range(8, 13)] + ["visual_012"]:
    _ERROR_LABELS[_tid] = {"failure_mode": "action_granularity_confusion", "layer": "reasoning"}
for _tid in ["defect_006", "defect_008", "defect_009", "defect_010"]:
    _ERROR_LABELS[_tid] = {"failure_mode": "overconfident_visual_grounding",
                           "layer": "routing+reasoning"}
for _tid in ["defect_011", "defect_012", "defect_013"]:
    _ERROR_LABELS[_tid] = {"failure_mode": "insufficient_context", "layer": "routing"}


def _row_channels(row: dict) -> set[str]:
    channels = set()
    if row["category"] in ("product_defect", "assembly_guidance", "warranty_claim"):
        channels.add("voice")
    if row["category"] in ("product_defect", "visual_troubleshooting", "warranty_claim"):
        channels.add("image")
    return channels


def _row_context(row: dict) -> tuple[str, ...]:
    if "context" in row:
        return row["context"]
    return _CONTEXT_DEFAULTS.get(row["category"], ())


def _row_profiles(row: dict) -> tuple[str, str]:
    """(treatment-arm profile, baseline-arm profile) keys for a row."""
    channels = _row_channels(row)
    route = row.get("image_route", "vision")
    voice_native = "native" if "voice" in channels else "n/a"
    voice_bn = "transcoded" if "voice" in channels else "n/a"
    if "image" in channels:
        image_native = "native" if route == "vision" else "transcoded"
        image_bn = "transcoded"
    else:
        image_native = image_bn = "n/a"
    return f"{voice_native}|{image_native}", f"{voice_bn}|{image_bn}"


def _row_keyword_sets(row: dict) -> tuple[set[str], set[str]]:
    """Matched keyword sets reaching synthesis, per arm, from the authored text."""
    vocab = frozenset(k for keywords, _ in KEYWORD_RULES for k in keywords)
    channels = _row_channels(row)
    route = row.get("image_route", "vision")
    base = _match_keywords(row["note"], vocab)
    if "image" in channels and route == "synthesis":
        base |= _match_keywords(row["caption"], vocab)
    for extra_caption in row.get("extra_images", []):
        base |= _match_keywords(extra_caption, vocab)
    treatment, baseline = set(base), set(base)
    if "voice" in channels:
        treatment |= _match_keywords(row["voice_native"], vocab)
        baseline |= _match_keywords(row["voice_transcoded"], vocab)
    if "image" in channels and route == "vision":
        treatment |= _match_keywords(row["vision_native"], vocab)
        baseline |= _match_keywords(row["vision_transcoded"], vocab)
    return treatment, baseline


def _verify_design(rows: list[dict]) -> None:
    """Re-derive every pinned tally from the authored strings; abort on drift."""
    by_category: dict[str, list[dict]] = {}
    for row in rows:
        by_category.setdefault(row["category"], []).append(row)
    expected_counts = {"product_defect": 13, "assembly_guidance": 12,
                       "visual_troubleshooting": 12, "warranty_claim": 13}
    assert {c: len(v) for c, v in by_category.items()} == expected_counts

    # Scripted contingency table and per-category correct counts.
    cells = {"a": 0, "b": 0, "c": 0, "d": 0}
    per_category: dict[str, list[int]] = {c: [0, 0] for c in expected_counts}
    for row in rows:
        treatment_ok = row["scripted"][0]["action"] == row["gt"]
        baseline_ok = row["scripted"][1]["action"] == row["gt"]
        cells["a" if treatment_ok and baseline_ok else
              "b" if treatment_ok else
              "c" if baseline_ok else "d"] += 1
        per_category[row["category"]][0] += treatment_ok
        per_category[row["category"]][1] += baseline_ok
    assert cells == {"a": 15, "b": 11, "c": 1, "d": 23}, cells
    assert per_category == {
        "product_defect": [6, 1],
        "assembly_guidance": [7, 5],
        "visual_troubleshooting": [11, 9],
        "warranty_claim": [2, 1],
    }, per_category

    # Keyword heuristic outcomes from the authored strings.
    kw_correct = [0, 0]
    identical = 0
    for row in rows:
        treat_set, base_set = _row_keyword_sets(row)
        treat_action, base_action = _rule_action(treat_set), _rule_action(base_set)
        assert (treat_action, base_action) == tuple(row["kw"]), (
            row["id"], treat_action, base_action, row["kw"])
        kw_correct[0] += treat_action == row["gt"]
        kw_correct[1] += base_action == row["gt"]
        identical += treat_action == base_action
        if treat_set == base_set:
            assert treat_action == base_action
    assert kw_correct == [18, 18], kw_correct
    assert identical == 35, identical

    # Dispatch-plan part budget: 40 voice, 40 image (28 native-routed),
    # 138 text (110 to the synthesis agent, 28 context parts to analyzers).
    voice_parts = image_parts = vision_routed = 0
    notes = evidence_parts = context_parts = 0
    for row in rows:
        channels = _row_channels(row)
        route = row.get("image_route", "vision")
        analysis = int("voice" in channels) + int("image" in channels and route == "vision")
        if "voice" in channels:
            voice_parts += 1 + len(row.get("extra_voice", []))
        if "image" in channels:
            image_parts += 1 + len(row.get("extra_images", []))
            vision_routed += route == "vision"
        notes += 1
        evidence_parts += 1 if (row.get("merge") and analysis >= 2) else analysis
        context_parts += len(_row_context(row))
    assert voice_parts == 40, voice_parts
    assert image_parts == 40 and vision_routed == 28, (image_parts, vision_routed)
    assert notes + evidence_parts == 110, (notes, evidence_parts)
    assert context_parts == 28, context_parts

    # Error labels cover exactly the treatment-arm failures.
    failures = {row["id"] for row in rows if row["scripted"][0]["action"] != row["gt"]}
    assert failures == set(_ERROR_LABELS), failures ^ set(_ERROR_LABELS)
    mode_counts: dict[str, int] = {}
    for entry in _ERROR_LABELS.values():
        mode_counts[entry["failure_mode"]] = mode_counts.get(entry["failure_mode"], 0) + 1
    assert mode_counts == {
        "policy_lookup_failure": 11,
        "action_granularity_confusion": 6,
        "overconfident_visual_grounding": 4,
        "insufficient_context": 3,
    }, mode_counts


def _task_doc(row: dict) -> dict:
    channels = _row_channels(row)
    route = row.get("image_route", "vision")
    doc: dict = {
        "task_id": row["id"],
        "category": row["category"],
        "priority": _PRIORITY_BY_CATEGORY[row["category"]],
        "ground_truth": row["gt"],
        "note": row["note"],
        "kb_refs": list(row["kb"]),
    }
    media_doc: dict = {}
    if "voice" in channels:
        media_doc["voice"] = {"file": f"media/{row['id']}_voice.wav",
                              "transcript": row["transcript"]}
        extras = row.get("extra_voice", [])
        if extras:
            media_doc["extra_voice"] = [
                {"file": f"media/{row['id']}_voice_{i + 2}.wav", "transcript": t}
                for i, t in enumerate(extras)
            ]
    if "image" in channels:
        media_doc["image"] = {"file": f"media/{row['id']}_image.png",
                              "caption": row["caption"]}
        extras = row.get("extra_images", [])
        if extras:
            media_doc["extra_images"] = [
                {"file": f"media/{row['id']}_image_{i + 2}.png", "caption": c}
                for i, c in enumerate(extras)
            ]
    doc["media"] = media_doc

    dispatch: dict = {}
    if route != "vision":
        dispatch["image_route"] = route
    context = _row_context(row)
    if context:
        dispatch["text_context_with"] = list(context)
    if row.get("merge"):
        dispatch["merge_evidence"] = True
    if dispatch:
        doc["dispatch"] = dispatch

    fixtures: dict = {}
    if "voice" in channels:
        fixtures["voice_summary"] = {"native": row["voice_native"],
                                     "transcoded": row["voice_transcoded"]}
    if "image" in channels and route == "vision":
        fixtures["vision_summary"] = {"native": row["vision_native"],
                                      "transcoded": row["vision_transcoded"]}
    treat_profile, base_profile = _row_profiles(row)
    scripted = {treat_profile: dict(row["scripted"][0])}
    if base_profile != treat_profile:
        scripted[base_profile] = dict(row["scripted"][1])
    else:
        assert row["scripted"][0] == row["scripted"][1], row["id"]
    fixtures["scripted_decision"] = scripted
    doc["fixtures"] = fixtures
    return doc


def build_reference_manifest(dest: Union[str, Path], validate: bool = True) -> Path:
    """Write the reference benchmark bundle into `dest` and return its path."""
    _verify_design(_ROWS)
    root = Path(dest)
    (root / "media").mkdir(parents=True, exist_ok=True)

    for row in _ROWS:
        channels = _row_channels(row)
        if "voice" in channels:
            (root / "media" / f"{row['id']}_voice.wav").write_bytes(
                media.build_wav(row["transcript"]))
            for i, transcript in enumerate(row.get("extra_voice", [])):
                (root / "media" / f"{row['id']}_voice_{i + 2}.wav").write_bytes(
                    media.build_wav(transcript))
        if "image" in channels:
            (root / "media" / f"{row['id']}_image.png").write_bytes(
                media.build_png(row["caption"]))
            for i, caption in enumerate(row.get("extra_images", [])):
                (root / "media" / f"{row['id']}_image_{i + 2}.png").write_bytes(
                    media.build_png(caption))

    rules_doc = {
        "version": 1,
        "description": (
            "Ordered rule table for the keyword decision heuristic. Matching is "
            "whole-word and case-insensitive over evidence summaries; a rule fires "
            "only when every keyword in it is present; the first firing rule wins; "
            "if nothing fires the fallback action applies."
        ),
        "fallback_action": ESCALATE,
        "rules": [{"keywords": list(k), "action": a} for k, a in KEYWORD_RULES],
    }
    (root / "keyword_rules.yaml").write_text(
        yaml.safe_dump(rules_doc, sort_keys=False, allow_unicode=True, width=88),
        encoding="utf-8",
    )

    (root / "error_labels.yaml").write_text(
        yaml.safe_dump(_ERROR_LABELS, sort_keys=True, allow_unicode=True, width=88),
        encoding="utf-8",
    )

    manifest_doc = {
        "schema_version": 1,
        "name": "cross-modal customer support benchmark (50 tasks)",
        "keyword_rules": "keyword_rules.yaml",
        "error_labels": "error_labels.yaml",
        "kb": {
            "products": [
                {"product_id": pid, "name": name, "warranty_terms": terms,
                 "exclusions": list(exclusions)}
                for pid, name, terms, exclusions in _PRODUCTS
            ],
            "troubleshooting": [
                {"symptom": symptom, "resolution_action": action, "note": note}
                for symptom, action, note in _TROUBLESHOOTING
            ],
        },
        "tasks": [_task_doc(row) for row in _ROWS],
    }
    (root / "manifest.yaml").write_text(
        yaml.safe_dump(manifest_doc, sort_keys=False, allow_unicode=True, width=88),
        encoding="utf-8",
    )
    if validate:
        load_manifest(root / "manifest.yaml")
    return root / "manifest.yaml"


def design_rows() -> list[dict]:
    """The raw row table, exposed for tests that cross-check the design."""
    return [dict(row) for row in _ROWS]
