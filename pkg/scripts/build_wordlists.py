#!/usr/bin/env python3
"""Regenerate the packaged word-list data files.

Writes src/fedcast/data/{lm_lexicon.csv,negators.txt,stopwords.txt}.
The lexicon is a curated subset of the standard finance sentiment
dictionary (enough coverage for central-bank text); the stopword list
is the common English list minus every lexicon word and negator, so
sentiment-bearing words are never stripped during cleaning.
"""

from __future__ import annotations

from pathlib import Path

POSITIVE = """
able abundant accomplish accomplished achieve achieved achievement achievements
advance advanced advancement advances advantage advantageous alliance assure
assured attain attained attractive beneficial benefit benefited benefiting
benefits best better bolster bolstered bolstering boom booming boost boosted
boosting breakthrough bright collaborate collaboration conclusive conducive
confident constructive courteous creative delight dependable desirable
diligent distinction easier easily easy effective efficiencies efficiency
efficient empower enable enabled enables encourage encouraged encouraging
enhance enhanced enhancement enhances enjoy excellence excellent exciting
exclusive exemplary favorable favorably favored flourish fortunate gain gained
gaining gains good great greater greatest grew grow growing grown grows growth
happy healthy helpful highest honor hope hopeful ideal impress impressive
improve improved improvement improvements improves improving innovate
innovation innovations innovative inspiration integrity invent leadership
leading loyal lucrative maximize milestone notable opportunities opportunity
optimal optimism optimistic outpace outperform outstanding perfect pleasant
pleased plentiful popular positive positively powerful premier prestigious
proactive productive proficiency profit profitability profitable profits
progress prosper prosperity prosperous proud proven prudent quality reassure
rebound rebounded recover recovered recovering recovery regain regained
reinforce reliable remarkable resilient resolve restore reward rewarding
robust satisfaction satisfactory satisfied satisfy secure solid stability
stabilization stabilize stabilized stable strength strengthen strengthened
strengthening strengthens strong stronger strongest succeed succeeded success
successes successful superior surpass thrive tremendous upturn valuable
vibrant win winner winning
""".split()

NEGATIVE = """
abandon abandoned abnormal adverse adversely aftermath against aggravate
alleged annul anomalies anomalous anomaly bad bankruptcy barrier barriers
bottleneck breach breakdown burden burdens burdensome catastrophe catastrophic
caution cautionary cautioned cautious cease challenge challenged challenges
challenging chaos claims collapse collapsed collapsing complaint complaints
concern concerned concerning concerns conflict confront confusion contraction
contracting corrected correction corrections costly crime crises crisis
critical criticism curtail curtailed cut cutback cutbacks cuts cutting damage
damaged damages danger dangerous deadlock death debarred decline declined
declines declining default defaults defect defensive deficiencies deficiency
deficient deficit deficits delay delayed delays delinquencies delinquency
demise depressed depression deteriorate deteriorated deteriorating
deterioration detract detrimental devastating deviate deviation difficult
difficulties difficulty diminish diminished disadvantage disagreement
disappoint disappointed disappointing disaster disastrous disclaim
discontinue discourage dislocation disorder disorderly displace dispute
disrupt disrupted disruption disruptions distort distortion distress
distressed doubt doubtful downgrade downgraded downturn downturns downward
downwards drag drain drop dropped drought erode eroded erosion error errors
escalate escalating evade exacerbate exacerbated excessive exposure exposures
fail failed failing fails failure failures fallout false fear fears fine
fined fines fired flaw flaws fluctuate forbid force forced foreclosure
forfeiture fraud fraudulent freeze frozen frustrate halt halted hamper
hampered hardship harm harmful harsh hazard hazardous hinder hindered
hostile hurt idle ignore illegal illiquid illiquidity imbalance imbalances
impair impaired impairment impede impediment impending improper inability
inaccurate inaction inadequate incapable incident incidents incomplete
inconsistent incorrect indict ineffective inefficiencies inefficiency
inefficient inferior inflict infringe inhibit injunction injure injury
insolvency insolvent instability insufficient interfere interference
interrupt interruption invalid investigate investigation investigations
involuntarily involuntary irregularities irregularity jeopardize lack lacked
lacking lag lagged lagging lags lapse late lawsuit lawsuits layoff layoffs
liability liable limitation limitations liquidate liquidation litigation lose
loses losing loss losses malfunction manipulate manipulation miscalculate
misconduct mislead misleading miss missed misstate misstatement mistake
mistakes misunderstand misuse negative negatively neglect negligence nonpayment
nonperforming object objection obsolete obstacle obstacles obstruct offence
omission omit onerous oppose opposition outage overbuild overdue overestimate
overload overlook overpaid overrun overstate oversupply overturn panic penalize
penalties penalty peril persist persistent pessimism pessimistic plaintiff
plea poor poorly pose posed precarious precaution preclude prejudice premature
pressure pressured pressures prevent prevented prevention problem problematic
problems prolong prolonged prosecute protest protracted punish question
questionable quit recall recession recessionary recessions reckless redact
reduce reduced reduces reducing reduction reductions refusal refuse refused
reject rejected rejection relinquish reluctance reluctant renegotiate
repossession reprimand repudiate rescind resign resignation restate
restatement restrain restrained restraint restrict restricted restriction
restrictions restrictive restructure restructuring retaliate retract
retrench revocation revoke risk risked riskier riskiest risking risks risky
sabotage sacrifice scandal scarcities scarcity scrutinize scrutiny seize
serious seriously setback setbacks sever severe severely shock shocks
shortage shortages shortcoming shortfall shortfalls shrink shrinkage shut
shutdown slash slippage slow slowdown slowdowns slowed slower slowest slowing
slowly slows sluggish slump slumped squeeze stagnant stagnate stagnation
stall stalled standstill stolen stoppage stress stressed stresses strike
stringent struggle struggled struggling subpoena substandard sue suffer
suffered suffering suspect suspend suspended suspension suspicion suspicious
taint tamper terminate terminated termination threat threaten threatened
threatening threats tighten tightened tightening trouble troubled turbulence
turmoil unable unacceptable unanticipated unattractive unauthorized
unavailable unaware uncollectible undercut undermine undermined underpaid
underperform underperformance underperformed understate undesirable
undisclosed undue uneconomic unemployed unemployment unexpected unexpectedly
unfair unfavorable unforeseen unfortunate unfounded unjust unlawful unlikely
unnecessary unpaid unplanned unpredictability unpredictable unprofitable
unreasonable unreliable unresolved unrest unsafe unsatisfactory unsold
unsound unstable unsuccessful unsuitable unsure untimely unusual unusually
unwanted unwilling upset urgent vandalism verdict veto violate violated
violation violations violence volatile volatility vulnerability vulnerable
warn warned warning warnings weak weaken weakened weakening weakens weaker
weakest weakness weaknesses worries worrisome worry worse worsen worsened
worsening worst writedown writedowns wrong wrongdoing
""".split()

UNCERTAINTY = """
almost ambiguity ambiguous anticipate anticipated anticipates anticipating
anticipation apparently appear appeared appearing appears approximate
approximately arbitrary assume assumed assumes assuming assumption assumptions
believe believed believes cautious clarification conceivable conditional
confusing contingencies contingency contingent could depend depended
dependence dependent depending depends deviate deviation differ differed
differing differs doubt doubtful exposure exposures fluctuate fluctuating
fluctuation fluctuations hidden imprecise imprecision improbable incompleteness
indefinite indeterminate instabilities instability intangible likelihood may
maybe might nearly occasionally pending perhaps possibilities possibility
possible possibly precaution precautionary predict predictability predicted
predicting prediction predictions predicts preliminary presumably presume
presumed probabilistic probabilities probability probable probably random
randomly reassess reassessed reassessment recalculate reconsider reexamine
reinterpret revise revised revision revisions risk risked riskier riskiest
risking risks risky roughly rumors seem seemed seemingly seems sometime
sometimes somewhat speculate speculation speculative sudden suddenly suggest
suggested suggesting suggests susceptibility susceptible tentative tentatively
turbulence uncertain uncertainly uncertainties uncertainty unclear unconfirmed
undecided undefined undetermined unexpected unexpectedly unforeseen unknown
unknowns unpredictable unproven unquantifiable unresolved unsettled unspecified
untested unusual unusually vagaries vague vaguely vagueness variability
variable variables variance variances variant variation variations varied
varies vary varying volatile volatilities volatility
""".split()

LITIGIOUS = """
adjudicate adjudication allegation allegations allege alleged allegedly
alleges antitrust appeal appealed appeals appellate arbitrate arbitration
arbitrator attorney attorneys breach breached claimant claimants complaint
complaints constitutional contract contractual convict convicted conviction
counterclaim court courts crime crimes criminal damages decree defendant
defendants deposition discovery dispute disputed disputes felony fraud
fraudulent indict indictment indictments infringe infringement injunction
injunctive judicial jurisdiction jury law lawful laws lawsuit lawsuits lawyer
lawyers legal legality legally legislation legislative liable libel litigant
litigate litigated litigation litigious mediation misrepresent
misrepresentation motion negligence negligent perjury petition petitioned
plaintiff plaintiffs plea plead pleaded pleading pleadings prosecute
prosecution prosecutor regulation regulations regulatory remand restitution
rulings sanction sanctioned sanctions settlement settlements statute statutes
statutory subpoena sue sued suing suit suits testify testimony tort tribunal
unconstitutional verdict verdicts violate violated violates violation
violations witness witnesses
""".split()

STRONG_MODAL = """
always best clearly definitely definitively highest lowest must never
strongly unambiguously uncompromising undisputed undoubtedly unequivocal
unequivocally unparalleled unsurpassed will
""".split()

WEAK_MODAL = """
almost apparently appeared appearing appears conceivable could depend depended
depending depends may maybe might nearly occasionally perhaps possible
possibly seldom sometimes somewhat suggest suggests uncertain usually
""".split()

NEGATORS = ["no", "not", "never", "none", "neither", "nor", "without"]

# the common English stopword list (pre-subtraction)
STOPWORDS_RAW = """
a about above after again all am an and any are aren as at be because been
before being below between both but by can cannot could did didn do does
doesn doing don down during each few for from further had hadn has hasn have
haven having he her here hers herself him himself his how i if in into is
isn it its itself just ll me mightn more most mustn my myself needn no nor
not now o of off on once only or other our ours ourselves out over own re
s same shan she should shouldn so some such t than that the their theirs
them themselves then there these they this those through to too under until
up ve very was wasn we were weren what when where which while who whom why
will with won wouldn you your yours yourself yourselves
""".split()


def main() -> None:
    out_dir = Path(__file__).resolve().parents[1] / "src" / "fedcast" / "data"
    out_dir.mkdir(parents=True, exist_ok=True)

    categories = {
        "positive": POSITIVE,
        "negative": NEGATIVE,
        "uncertainty": UNCERTAINTY,
        "litigious": LITIGIOUS,
        "strong_modal": STRONG_MODAL,
        "weak_modal": WEAK_MODAL,
    }

    rows = []
    for cat, words in categories.items():
        for w in sorted(set(words)):
            rows.append(f"{w},{cat}")
    lex_path = out_dir / "lm_lexicon.csv"
    lex_path.write_text("word,category\n" + "\n".join(sorted(rows)) + "\n", encoding="utf-8")

    neg_path = out_dir / "negators.txt"
    neg_path.write_text("\n".join(NEGATORS) + "\n", encoding="utf-8")

    lexicon_words = {w for words in categories.values() for w in words}
    protected = lexicon_words | set(NEGATORS)
    stop = sorted(set(STOPWORDS_RAW) - protected)
    stop_path = out_dir / "stopwords.txt"
    stop_path.write_text("\n".join(stop) + "\n", encoding="utf-8")

    print(f"wrote {lex_path} ({len(rows)} rows)")
    print(f"wrote {neg_path} ({len(NEGATORS)} words)")
    print(f"wrote {stop_path} ({len(stop)} words)")


if __name__ == "__main__":
    main()
