//! Word lists backing the synthetic generator and the bundled LM corpus.
//!
//! `STYLE_*` words form the narrow promotional register the bundled
//! language model is trained on. `BROAD` is a wide everyday vocabulary that
//! human accounts draw from uniformly.

pub const STYLE_ADJECTIVES: &[&str] = &[
    "amazing", "bullish", "decentralized", "exciting", "innovative", "massive", "next", "powerful",
    "revolutionary", "smart", "strong", "transparent", "unstoppable", "new", "huge", "secure",
    "incredible", "great", "early", "global", "open", "scalable", "trusted", "bright",
];

pub const STYLE_NOUNS: &[&str] = &[
    "future", "community", "project", "market", "token", "wallet", "platform", "ecosystem",
    "opportunity", "growth", "innovation", "network", "protocol", "airdrop", "launch", "update",
    "roadmap", "partnership", "journey", "vision", "builders", "holders", "investors", "gains",
    "adoption", "technology", "movement", "space", "economy", "revolution",
];

pub const STYLE_TOPICS: &[&str] = &[
    "crypto", "bitcoin", "ethereum", "web3", "blockchain", "defi", "nft", "ai", "metaverse",
    "solana", "trading", "fintech", "startups", "altcoins", "dao",
];

pub const STYLE_VERBS: &[&str] = &[
    "is", "will", "changes", "drives", "powers", "shapes", "builds", "unlocks", "transforms",
    "leads", "grows", "supports", "joins", "brings", "creates",
];

pub const STYLE_OPENERS: &[&str] = &[
    "excited to share", "do not miss", "big news", "just in", "reminder", "thrilled to announce",
    "check out", "stay tuned for", "join us for", "proud to support",
];

pub const STYLE_CLOSERS: &[&str] = &[
    "lets go", "to the moon", "stay tuned", "dyor", "wagmi", "do not miss out", "more soon",
    "the best is yet to come", "join now", "huge things ahead",
];

/// Everyday vocabulary; deliberately disjoint in register from the style lists.
pub const BROAD: &[&str] = &[
    "apple", "river", "kitchen", "garden", "window", "morning", "bicycle", "lunch", "coffee", "rain",
    "mountain", "sister", "brother", "mother", "father", "grandma", "neighbor", "teacher", "doctor",
    "dentist", "library", "school", "homework", "exam", "weekend", "holiday", "beach", "forest",
    "pizza", "pasta", "soup", "sandwich", "cookie", "cake", "birthday", "wedding", "concert", "movie",
    "novel", "poem", "guitar", "piano", "drums", "song", "album", "podcast", "episode", "season",
    "football", "soccer", "basketball", "tennis", "hockey", "baseball", "swimming", "running",
    "hiking", "camping", "fishing", "knitting", "baking", "cooking", "painting", "drawing",
    "photography", "gardening", "reading", "writing", "sleeping", "dreaming", "laughing", "crying",
    "walking", "driving", "traffic", "bus", "train", "airport", "flight", "luggage", "passport",
    "hotel", "museum", "gallery", "theater", "stadium", "park", "bench", "fountain", "bridge",
    "street", "corner", "shop", "market", "bakery", "pharmacy", "hospital", "office", "meeting",
    "deadline", "email", "printer", "keyboard", "laptop", "phone", "charger", "battery", "screen",
    "puppy", "kitten", "dog", "cat", "horse", "bird", "squirrel", "rabbit", "turtle", "goldfish",
    "spider", "butterfly", "flower", "tulip", "rose", "daisy", "oak", "maple", "pine", "grass",
    "snow", "storm", "thunder", "sunshine", "cloud", "wind", "fog", "heat", "cold", "autumn",
    "winter", "spring", "summer", "january", "october", "monday", "friday", "tonight", "yesterday",
    "tomorrow", "honestly", "literally", "basically", "probably", "maybe", "finally", "somehow",
    "anyway", "seriously", "totally", "barely", "almost", "always", "never", "sometimes", "often",
    "tired", "hungry", "sleepy", "grumpy", "happy", "sad", "angry", "nervous", "proud", "bored",
    "confused", "delighted", "annoyed", "relieved", "lonely", "curious", "silly", "weird", "cozy",
    "messy", "quiet", "noisy", "crowded", "empty", "broken", "fixed", "lost", "found", "late",
    "early", "slow", "fast", "cheap", "expensive", "warm", "chilly", "sticky", "crunchy", "spicy",
    "sweet", "sour", "bitter", "salty", "fresh", "stale", "shiny", "dusty", "muddy", "soggy",
    "forgot", "remembered", "burned", "spilled", "dropped", "painted", "fixed", "cleaned", "washed",
    "folded", "ironed", "cooked", "baked", "boiled", "fried", "ate", "drank", "slept", "woke",
    "missed", "caught", "threw", "kicked", "scored", "lost", "won", "tied", "cheered", "booed",
    "visited", "called", "texted", "hugged", "kissed", "argued", "laughed", "sang", "danced",
    "watched", "listened", "borrowed", "returned", "bought", "sold", "wrapped", "opened", "closed",
    "locked", "unlocked", "planted", "watered", "picked", "peeled", "chopped", "stirred", "tasted",
    "smelled", "noticed", "wondered", "guessed", "hoped", "wished", "promised", "apologized",
    "grandpa", "cousin", "aunt", "uncle", "roommate", "coworker", "boss", "landlord", "plumber",
    "mechanic", "barista", "waiter", "chef", "farmer", "nurse", "pilot", "driver", "student",
    "toddler", "baby", "teenager", "grandkids", "twins", "friends", "strangers", "everyone",
    "nobody", "somebody", "umbrella", "jacket", "sweater", "socks", "boots", "sneakers", "scarf",
    "gloves", "hat", "glasses", "backpack", "wallet", "keys", "receipt", "ticket", "coupon", "bill",
    "rent", "groceries", "laundry", "dishes", "vacuum", "fridge", "oven", "stove", "sink", "shower",
    "bathtub", "pillow", "blanket", "couch", "chair", "table", "lamp", "curtains", "carpet",
    "stairs", "basement", "attic", "garage", "driveway", "fence", "mailbox", "porch", "balcony",
    "yard", "lawn", "hose", "shovel", "ladder", "hammer", "nails", "paint", "glue", "tape",
    "scissors", "pencil", "notebook", "calendar", "clock", "alarm", "candle", "mirror", "towel",
    "soap", "shampoo", "toothbrush", "breakfast", "dinner", "snack", "dessert", "leftovers",
    "tacos", "burrito", "noodles", "rice", "beans", "salad", "cheese", "bread", "butter", "jam",
    "honey", "eggs", "bacon", "pancakes", "waffles", "cereal", "yogurt", "banana", "orange",
    "lemon", "grapes", "cherries", "peaches", "melon", "carrots", "potatoes", "onions", "garlic",
    "pepper", "tomatoes", "cucumber", "broccoli", "spinach", "mushrooms", "popcorn", "chocolate",
    "candy", "tea", "juice", "milk", "water", "lemonade", "soda", "wine", "beer", "marathon",
    "gym", "yoga", "stretching", "knee", "ankle", "elbow", "shoulder", "headache", "sneeze",
    "cough", "fever", "nap", "insomnia", "dentures", "braces", "haircut", "beard", "freckles",
    "tattoo", "sunburn", "mosquito", "bees", "ants", "pigeons", "ducks", "geese", "owls", "crows",
    "sunset", "sunrise", "moon", "stars", "comet", "eclipse", "rainbow", "puddle", "lake", "pond",
    "creek", "waterfall", "cliff", "valley", "meadow", "desert", "island", "harbor", "lighthouse",
    "ferry", "canoe", "kayak", "sailboat", "tractor", "barn", "chickens", "cows", "goats", "sheep",
    "bookstore", "thrift", "flea", "garage", "picnic", "barbecue", "fireworks", "parade",
    "festival", "fair", "carnival", "circus", "zoo", "aquarium", "playground", "swing", "slide",
    "kite", "frisbee", "puzzle", "chess", "cards", "dice", "trivia", "karaoke", "bingo", "quiz",
    "recipe", "casserole", "lasagna", "stew", "chili", "dumplings", "sushi", "curry", "kebab",
    "homesick", "nostalgic", "grateful", "thankful", "stubborn", "clumsy", "sneaky", "brave",
    "gentle", "patient", "polite", "rude", "loud", "shy", "fancy", "plain", "ordinary", "odd",
];

pub const FIRST_NAMES: &[&str] = &[
    "james", "mary", "robert", "patricia", "john", "jennifer", "michael", "linda", "david",
    "elizabeth", "william", "barbara", "richard", "susan", "joseph", "jessica", "thomas", "sarah",
    "charles", "karen", "daniel", "nancy", "matthew", "lisa", "anthony", "betty", "mark", "sandra",
    "donald", "ashley", "steven", "emily", "paul", "donna", "andrew", "michelle", "joshua", "carol",
    "kevin", "amanda", "brian", "melissa", "george", "deborah", "timothy", "stephanie", "ronald",
    "rebecca", "jason", "laura", "edward", "sharon", "ryan", "cynthia", "jacob", "kathleen", "gary",
    "amy", "nicholas", "angela", "eric", "shirley", "jonathan", "anna", "stephen", "brenda", "larry",
    "pamela", "justin", "emma", "scott", "nicole", "brandon", "helen", "priya", "rika", "diana",
    "dewi", "omar", "fatima", "chen", "wei", "yuki", "hiro", "lucas", "sofia", "mateo", "valentina",
];

pub const LAST_NAMES: &[&str] = &[
    "smith", "johnson", "williams", "brown", "jones", "garcia", "miller", "davis", "rodriguez",
    "martinez", "hernandez", "lopez", "gonzalez", "wilson", "anderson", "thomas", "taylor", "moore",
    "jackson", "martin", "lee", "perez", "thompson", "white", "harris", "sanchez", "clark",
    "ramirez", "lewis", "robinson", "walker", "young", "allen", "king", "wright", "scott", "torres",
    "nguyen", "hill", "flores", "green", "adams", "nelson", "baker", "hall", "rivera", "campbell",
    "mitchell", "carter", "roberts", "patel", "kim", "singh", "wong", "tanaka", "silva", "costa",
];

pub const CITIES: &[&str] = &[
    "new york", "los angeles", "chicago", "houston", "phoenix", "philadelphia", "san antonio",
    "san diego", "dallas", "austin", "seattle", "denver", "boston", "nashville", "portland",
    "atlanta", "miami", "minneapolis", "detroit", "cleveland", "pittsburgh", "baltimore", "toronto",
    "vancouver", "london", "manchester", "dublin", "sydney", "melbourne", "auckland", "ohio",
    "texas", "california", "oregon", "vermont", "maine", "kentucky", "georgia", "montana", "utah",
];

pub const TIME_ZONES: &[&str] = &[
    "Eastern Time (US & Canada)", "Central Time (US & Canada)", "Pacific Time (US & Canada)",
    "Mountain Time (US & Canada)", "London", "Dublin", "Sydney",
];

pub const LANGS: &[&str] = &["en", "en", "en", "en", "en-gb", "es", "fr", "de"];

/// Bot bio templates; `{adj}`, `{noun}`, `{topic}` are slot-filled.
pub const BOT_BIO_TEMPLATES: &[&str] = &[
    "{adj} {topic} enthusiast | building the {noun} of {topic} | dm for collabs",
    "passionate about {topic} and {topic} | {adj} {noun} ahead | not financial advice",
    "{topic} investor | {adj} {noun} believer | sharing daily {topic} insights",
    "exploring the {adj} world of {topic} | {noun} hunter | {topic} {noun}",
    "helping people win with {topic} | {adj} {noun} | follow for {topic} updates",
];

/// Display-name motifs of the templated-bot kind.
pub const BOT_NAME_PREFIXES: &[&str] = &[
    "btc", "crypto", "web3", "nft", "defi", "ai", "moon", "alpha", "chain", "token",
];

pub const BOT_NAME_SUFFIXES: &[&str] = &[
    "hope", "daily", "news", "king", "queen", "signals", "insider", "wizard", "hub", "guru",
];
