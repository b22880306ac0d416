"""Fixed English stop-word list used by the tokenizer.

The list is committed (not pulled from a library) so that topic tables are
reproducible byte-for-byte across environments. Common contractions are
included because the tokenizer keeps intra-word apostrophes.
"""

STOP_WORDS = frozenset("""
a about above across after afterwards again against all almost alone along
already also although always am among amongst an and another any anyhow
anyone anything anyway anywhere are around as at back be became because
become becomes becoming been before beforehand behind being below beside
besides between beyond both bottom but by call can cannot could did do does
doing done down due during each either else elsewhere empty enough etc even
ever every everyone everything everywhere except few first five for former
formerly four from front full further get give go had has have he hence her
here hereafter hereby herein hereupon hers herself him himself his how
however hundred i if in indeed into is it its itself just keep last latter
latterly least less ltd made many may me meanwhile might mine more moreover
most mostly move much must my myself name namely neither never nevertheless
next nine no nobody none nor not nothing now nowhere of off often on once
one only onto or other others otherwise our ours ourselves out over own part
per perhaps please put rather re really said same say see seem seemed
seeming seems serious several she should since six so some somehow someone
something sometime sometimes somewhere still such take ten than that the
their them themselves then thence there thereafter thereby therefore therein
thereupon these they third this those though three through throughout thru
thus to together too top toward towards twelve twenty two un under until up
upon us very via was we well were what whatever when whence whenever where
whereafter whereas whereby wherein whereupon wherever whether which while
whither who whoever whole whom whose why will with within without would yet
you your yours yourself yourselves
ain aren aren't can't couldn couldn't daren't didn didn't doesn doesn't don
don't hadn hadn't hasn hasn't haven haven't he'd he'll he's here's i'd i'll
i'm i've isn isn't it'd it'll it's let's ll mightn't mustn mustn't needn't
shan't she'd she'll she's shouldn shouldn't that'll that's there's they'd
they'll they're they've ve wasn wasn't we'd we'll we're we've weren weren't
what's where's who's won't wouldn wouldn't you'd you'll you're you've
""".split())
