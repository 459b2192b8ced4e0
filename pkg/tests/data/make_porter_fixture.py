"""Regenerates the 1000-word stemmer fixture.

The vocabulary mixes curated English words covering every rule family with
seeded word-like strings for rule interactions; expected outputs come from the
independent reference implementation in tests/porter_oracle.py and were
spot-reviewed against the algorithm's worked examples. Run from the repo root:

    python3 tests/data/make_porter_fixture.py
"""

import random
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

from porter_oracle import reference_stem  # noqa: E402

CURATED = """
caresses ponies ties caress cats feed agreed plastered bled motoring sing
conflated troubled sized hopping tanned falling hissing fizzed failing filing
happy sky relational conditional rational valenci hesitanci digitizer
conformabli radicalli differentli vileli analogousli vietnamization predication
operator feudalism decisiveness hopefulness callousness formaliti sensitiviti
sensibiliti triplicate formative formalize electriciti electrical hopeful
goodness revival allowance inference airliner gyroscopic adjustable defensible
irritant replacement adjustment dependent adoption homologou communism activate
angulariti homologous effective bowdlerize probate rate cease controll roll
generalizations oscillators abilities alignment analogies apprehension
arguments associations assumptions attractions boundaries calculations
capabilities categories celebrations characterizations classifications
collections combinations communications comparisons compilations completions
complications compositions computations conclusions configurations confirmations
connections considerations constructions contributions conversations convictions
corrections correlations corruptions creations decisions declarations
decorations definitions demonstrations descriptions destinations developments
directions discussions distributions divisions educations elections emotions
evaluations examinations exceptions executions expansions expectations
experiences explanations explorations expressions extensions formations
foundations functions generations illustrations imaginations implications
impressions inclinations indications informations inspections installations
institutions instructions intentions interactions interpretations introductions
inventions investigations invitations justifications limitations locations
machines manipulations meanings measurements mechanisms migrations
modifications motivations movements negotiations observations occupations
operations opinions organizations orientations participations perceptions
performances permissions populations positions possessions possibilities
predictions preparations presentations preservations procedures productions
professions promotions pronunciations properties propositions protections
publications qualifications quantities questions reactions realizations
recommendations reductions reflections registrations regulations relations
repetitions representations reproductions requirements reservations resolutions
restrictions revolutions selections sensations separations situations solutions
specifications statements structures subscriptions suggestions transactions
transformations translations transmissions variations vibrations
running runner runs walked walking walks jumped jumping jumps talked talking
talks played playing plays worked working works helped helping helps
studied studying studies carried carrying carries married marrying marries
hurried hurrying hurries buried burying buries emptied emptying empties
tried trying tries cried crying cries dried drying dries flied flying flies
agreement agreements disagreement arranging arrangement arrangements
amusement amusements announcement announcements development environments
government governs governing governed
singing singer singers bringing bringer ringing
stopped stopping stopper shopped shopping shopper dropped dropping dropper
planned planning planner scanned scanning scanner
hoped hoping hopes noted noting notes saved saving saves used using uses
loved loving loves moved moving moves named naming names
happier happiest happily easier easiest easily heavier heaviest heavily
luckier luckiest luckily prettier prettiest
nationalization nationalizations internationalization industrialization
characterization centralization civilization colonization dramatization
equalization fertilization generalization hospitalization idealization
immunization legalization localization mobilization modernization
naturalization neutralization normalization optimization organization
pasteurization privatization rationalization realization socialization
specialization stabilization standardization sterilization summarization
symbolization synchronization urbanization utilization visualization
conspirator curator dictator educator elevator escalator imitator
incubator indicator instigator insulator investigator legislator liberator
mediator moderator navigator orator radiator refrigerator senator spectator
agreeable acceptable accountable achievable actionable adaptable admirable
adorable advisable affordable agreeably amiable applicable appreciable
approachable arguable attainable available avoidable bearable believable
breakable changeable chargeable comfortable commendable comparable
onliness oneness openness darkness weakness wellness fitness illness
sadness madness boldness coldness kindness blindness fondness
electricity publicity simplicity complicity duplicity felicity toxicity
authenticity elasticity ethnicity periodicity specificity
skies flies spies dies lies pies applies supplies replies implies denies
relies defies unifies verifies notifies justifies clarifies glorifies
terrifies testifies qualifies satisfies simplifies multiplies occupies
bellies berries bodies bunnies candies cherries cities copies counties
daisies duties enemies fairies families ferries galaxies hobbies injuries
ladies lilies memories navies parties pennies ponchos puppies
"""


def main() -> None:
    random.seed(20160721)
    words: list[str] = []
    seen = set()
    for w in CURATED.split():
        w = w.strip().lower()
        if w and w not in seen:
            seen.add(w)
            words.append(w)

    suffixes = [
        "", "s", "es", "ies", "sses", "ed", "eed", "ing", "y", "ational", "tional",
        "enci", "anci", "izer", "abli", "alli", "entli", "eli", "ousli", "ization",
        "ation", "ator", "alism", "iveness", "fulness", "ousness", "aliti", "iviti",
        "biliti", "icate", "ative", "alize", "iciti", "ical", "ful", "ness", "al",
        "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent",
        "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize", "e", "ll",
    ]
    alphabet = "abcdefghijklmnopqrstuvwxyz"
    while len(words) < 1000:
        root = "".join(random.choice(alphabet) for _ in range(random.randint(2, 7)))
        w = root + random.choice(suffixes)
        if w not in seen:
            seen.add(w)
            words.append(w)

    vocab_path = HERE / "porter_vocab.txt"
    expected_path = HERE / "porter_expected.txt"
    vocab_path.write_text("\n".join(words) + "\n", encoding="utf-8")
    expected_path.write_text("\n".join(reference_stem(w) for w in words) + "\n", encoding="utf-8")
    print(f"wrote {len(words)} words to {vocab_path.name} / {expected_path.name}")


if __name__ == "__main__":
    main()
