//! Theme tables and other published values the fixtures reproduce.

pub const GAMING_BASELINE: [(&str, &str); 11] = [
    ("Gaming and Education", "This group includes topics related to the use of video games for education and learning, including the benefits and challenges of using games for teaching, the importance of creating education-based games, and the potential of gamification in education."),
    ("Ethics in Gaming", "This group includes topics related to ethical issues in gaming, such as violence, diversity, monetization, piracy, and inclusion. It also includes discussions on the responsibility of developers and publishers to balance creative expression with ethical considerations."),
    ("Monetization in Gaming", "This group includes topics related to how games make money, including free-to-play with in-game purchases, paid games, and pay-to-win models. It also includes discussions on the ethical implications of micro-transactions and gambling-like systems."),
    ("Video Games as Art", "This group includes topics related to the growing acceptance of video games as an artistic medium, citing examples of games that are considered high art. It also includes discussions on the combination of traditional art forms and gameplay."),
    ("Game Development", "This group includes topics related to game development, including advice for developers, the importance of good management and communication, and the role of innovation in creating immersive experiences."),
    ("Representation in Gaming", "This group includes topics related to representation in gaming, including diversity in race and gender, the importance of relatable characters, and the progress that has been made in the industry."),
    ("Mobile Gaming", "This group includes topics related to mobile gaming, including its accessibility and oversaturation in the market."),
    ("Esports", "This group includes topics related to esports, including its benefits, the importance of physical and mental health, and the need for moderation and balance."),
    ("Gamification", "This group includes topics related to gamification, including its use for education and productivity, the need for entertainment to motivate people, and the potential for complicity in neoliberal capitalism."),
    ("Physical Health and Gaming", "This group includes topics related to the impact of gaming on physical health, including the potential for reduced physical activity and the benefits and drawbacks of using games for physical rehabilitation."),
    ("Gaming Communities", "This group includes topics related to gaming communities, including their inclusivity and toxicity levels, the significance of social interactions in gameplay, and tips for positive game interaction."),
];

/// Three runs at temperature 1. Names are as published; descriptions were written for the fixtures.
pub const GAMING_SWEEP_T1: [[(&str, &str); 11]; 3] = [
    [
        ("The Benefits of Gaming and Education", "This group includes topics related to the benefits of video games for education and learning, including problem solving and the potential of games for teaching."),
        ("Ethical Issues in Gaming", "This group includes topics related to ethical issues in gaming, such as piracy, diversity and inclusion, and the responsibility of developers and publishers for the content they release."),
        ("Monetization and Business Models in Gaming", "This group includes topics related to monetization and business models, including free-to-play games, in-game purchases, micro-transactions and pay-to-win models."),
        ("Video Games as Art", "This group includes topics related to video games as an artistic medium, including storytelling, visual design and the growing acceptance of games as high art."),
        ("Gaming and Age Restrictions", "This group includes topics related to age restrictions and age ratings for games, including parental control, age-appropriate content and protecting young children."),
        ("Game Development and Management", "This group includes topics related to game development and the management of development teams, including communication, planning and advice for developers."),
        ("Gaming for Relaxation and Nurturing Experiences", "This group includes topics related to playing games to relax and unwind, including calm and nurturing experiences that reduce stress after work or study."),
        ("Immersive World-Building and Story-Driven Games", "This group includes topics related to immersive worlds and story-driven games, including narrative depth, exploration and memorable characters."),
        ("Diversity and Representation in Gaming", "This group includes topics related to diversity and representation in gaming, including race and gender in characters and the progress made by the industry."),
        ("eSports and Competitive Gaming", "This group includes topics related to esports and competitive gaming, including professional players, tournaments, the benefits of competition and the need for moderation and balance."),
        ("Gaming and Physical Health", "This group includes topics related to the impact of gaming on physical health, including reduced physical activity, posture and the use of games for physical rehabilitation."),
    ],
    [
        ("The Positive Impacts of Gaming", "This group includes topics related to positive impacts of gaming on everyday life, including friendship, creativity and confidence."),
        ("Ethical Issues in Gaming", "This group includes topics related to ethical issues in gaming, including violence, sexism, piracy and the responsibility of developers and publishers towards players."),
        ("Gaming and Art", "This group includes topics related to games as art, including artistic expression, visual style and the acceptance of games as an artistic medium and high art."),
        ("Free-to-Play and Monetization models", "This group includes topics related to free-to-play monetization models, including in-game purchases, loot boxes, pay-to-win and micro-transactions."),
        ("Gaming Industry and Development", "This group includes topics related to the gaming industry and development studios, including innovation, working conditions and publishing."),
        ("Diversity and Representation in Gaming", "This group includes topics related to diversity and representation in gaming, including gender and race of characters and relatable protagonists."),
        ("Gaming in Education", "This group includes topics related to games in education and learning, including teaching with games, serious games and the challenges of using games in schools."),
        ("Identity in Gaming", "This group includes topics related to identity and self-expression of players, including avatars, role-play and belonging."),
        ("Gaming and Physical Health", "This group includes topics related to gaming and physical health, including reduced physical activity, exercise games and rehabilitation."),
        ("Esports", "This group includes topics related to esports, including competition, professional teams, streaming and the need for moderation and balance."),
        ("Positive Gaming Interaction", "This group includes topics related to age-appropriate interaction for young children, including age ratings, parental control and safe online play."),
    ],
    [
        ("Using video games for learning and education", "This group includes topics related to using video games for learning and education, including classroom use, educational potential and teaching."),
        ("Ethical concerns in gaming", "This group includes topics related to ethical concerns in gaming, including piracy, violence and the responsibility of developers and publishers."),
        ("Video games as art", "This group includes topics related to video games as art, including aesthetics, narrative and the acceptance of games as an artistic medium."),
        ("Representations in gaming", "This group includes topics related to representations in gaming, including gender, race, diversity and relatable characters."),
        ("Monetization and business models in gaming", "This group includes topics related to monetization and business models, including micro-transactions, in-game purchases and pay-to-win."),
        ("The impact of gaming on physical and mental health", "This group includes topics related to the impact of gaming on physical health and mental wellbeing, including reduced physical activity, rehabilitation, stress and sleep."),
        ("Video games for recreation and relaxation", "This group includes topics related to recreation and relaxation, including casual play, unwinding and escapism."),
        ("Video games in sports and eSports", "This group includes topics related to sports and esports, including competition, professional players, tournaments and the need for balance and moderation."),
        ("Innovation and creativity in game development", "This group includes topics related to innovation and creativity in game development, including new mechanics and independent studios."),
        ("Using gamification for non-entertainment purposes", "This group includes topics related to gamification for non-entertainment purposes, including productivity, workplace motivation and health apps."),
        ("Positive aspects of gaming", "This group includes topics related to positive aspects of gaming, including social connection, skills and enjoyment."),
    ],
];

pub const TEACHING_BASELINE: [(&str, &str); 7] = [
    ("Teaching Data Analysis and Interpretation", "This group includes topics related to teaching students how to analyze and interpret data, including identifying good and bad graphs, understanding statistical knowledge, and teaching critical thinking about data."),
    ("Mentoring and Diversifying the Field", "This group includes topics related to mentoring young students and making a difference in diversifying the field of data analysis."),
    ("Teaching GIS and Geospatial Data", "This group includes topics related to teaching GIS software and geospatial data, including challenges in teaching and the practical use of the software."),
    ("Collaborative Learning and Interpersonal Interaction", "This group includes topics related to the benefits of collaborative learning and interpersonal interaction in acquiring quantitative skills."),
    ("Teaching Research Methods", "This group focuses on teaching research methods and the challenges of accessing and using data. The group emphasizes the importance of technical and statistical skills in survey research exercises."),
    ("Teaching Programming and Technical Skills", "Group related to teaching students programming and technical skills, including the lack of programming classes available to non-computer science majors and the need for a quantitative social science minor or data sciences program."),
    ("External Support and Resources for Teaching with Data", "Group related to the lack of external support and resources for teaching with data, including the need for training opportunities and a centralized resource for instructors."),
];

/// Three runs at temperature 1. Only the names were published.
pub const TEACHING_SWEEP_T1: [[&str; 7]; 3] = [
    [
        "Importance of Data Analysis and Critical Thinking",
        "Teaching Methods and Resources",
        "Undergraduate Instruction and Mentoring",
        "Graphics and Visualization",
        "Geospatial Data",
        "Programming and Technical Skills",
        "Statistical Literacy and Research Design",
    ],
    [
        "Statistical Literacy",
        "Teaching Tools",
        "Diversifying the Field",
        "Collaboration",
        "Challenges in Teaching",
        "Psychology-specific Themes",
        "Practical Skills",
    ],
    [
        "Teaching Approaches to Data Analysis",
        "Access to Data",
        "Software and Tools for Data Analysis",
        "Teaching with Data as a Pedagogical Theme",
        "Quantitative Research Design",
        "Sociology and Data Analysis",
        "Geospatial Data",
    ],
];

/// Three runs at temperature 0.5. Only the names were published.
pub const TEACHING_SWEEP_T05: [[&str; 7]; 3] = [
    [
        "Teaching Critical Thinking and Interpretation of Data",
        "Teaching with Data Sources and Tools",
        "Mentoring and Diversifying the Field",
        "Teaching Statistics and Research Methods",
        "Teaching Geospatial Data",
        "Remote Teaching and Learning",
        "Sociological Research and Data Skills",
    ],
    [
        "Teaching Statistical Literacy",
        "Teaching with Data",
        "Mentoring and Diversifying the Field",
        "Teaching GIS",
        "Teaching Research Methods",
        "Challenges in Teaching with Data",
        "Practical Data Skills in Sociology",
    ],
    [
        "Statistical Literacy",
        "Teaching Challenges",
        "Diversity and Inclusion",
        "Teaching Resources",
        "Quantitative Methods",
        "Programming",
        "Remote Instruction",
    ],
];

/// Codes listed under the education theme of the gaming baseline.
pub const EDUCATION_THEME_CODES: [&str; 8] = [
    "Problem Solving",
    "Educational Potential",
    "Success Metrics",
    "Teaching through games",
    "Gender and Diversity in eSports",
    "Practical Obligation of Games",
    "Off-the-shelf games",
    "Games in Education",
];

/// Blind renaming results: (baseline name, new name, two-sentence summary).
pub const RENAMED: [(&str, &str, &str); 2] = [
    (
        "Gaming and Education",
        "Games for Education and Diversity",
        "Games have the potential to teach various skills and disciplines, and can be used to bridge the gap between different target markets. However, there is a need for more games specifically designed for educational purposes and for greater diversity and representation in the gaming industry.",
    ),
    (
        "Ethics in Gaming",
        "Ethical Issues in Gaming",
        "Developers and publishers need to be aware of what they put in their games, especially if kids are playing them, and context is important. Games have a responsibility to recognize and address issues such as sexism and ethical concerns.",
    ),
];

pub const POETS_PROMPT: &str = "write me the names of the 3 most important Italian poets";
pub const POETS_T0: &str = "1. Dante Alighieri\n2. Francesco Petrarca\n3. Giovanni Boccaccio";
pub const POETS_T1: &str = "Dante Alighieri, Francesco Petrarca and Ludovico Ariosto";

/// Token counts of the four chunks of the first gaming interview.
pub const PLAY_1_CHUNK_TOKENS: [usize; 4] = [2479, 2513, 2486, 1740];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineCounts {
    pub chunks: usize,
    pub raw_codes: usize,
    pub reduced_codes: usize,
    pub themes: usize,
}

pub const GAMING_COUNTS: PipelineCounts = PipelineCounts {
    chunks: 56,
    raw_codes: 161,
    reduced_codes: 89,
    themes: 11,
};

pub const TEACHING_COUNTS: PipelineCounts = PipelineCounts {
    chunks: 35,
    raw_codes: 101,
    reduced_codes: 63,
    themes: 7,
};

/// Reduced gaming codes named in the keyword search results.
pub const GAMING_PINNED_CODES: [(usize, &str); 4] = [
    (39, "Marketing of Videogames"),
    (51, "Violence in Games"),
    (59, "Online Marketing"),
    (80, "Marketing and Intent"),
];

/// First raw teaching codes with the beginning of their quotes.
pub const TEACHING_FIRST_CODES: [(&str, &str); 4] = [
    ("Importance of Data Analysis", "I consider it one of the most important classes I teach because regardless of what career they go"),
    ("Providing Data Sets", "I have all of the data that they get. So there are specific assignments for different types of modu"),
    ("Teaching Critical Thinking", "And I asked the students, you know, \"What does this mean? Do you know what this means? Y"),
    ("Misleading Graphs", "And so we talked about where people place their axes and all of that... we have to assess what t"),
];
