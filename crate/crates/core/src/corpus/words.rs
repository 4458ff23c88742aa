// Word pools for randomized chart text. Category words stay at six
// characters or fewer so eight tick labels fit side by side at scale 1.

pub(super) const TITLE_WORDS: &[&str] = &[
    "Average", "Monthly", "Rainfall", "Annual", "Sales", "Growth", "Population", "Survey",
    "Results", "Energy", "Usage", "Regional", "Market", "Share", "Student", "Scores", "Daily",
    "Traffic", "Revenue", "Weekly", "Crop", "Yield", "Budget", "Income", "Library", "Visits",
    "Word", "Counts", "Novel", "Lengths", "Letter", "Poetry", "Corpus", "Archive", "Records",
    "Museum", "Citation", "Trends", "Language", "Election", "Turnout", "Housing", "Prices",
    "Rainy", "Days", "Voter", "Panel", "Reading", "Habits", "Book", "Loans", "Author",
    "Output", "Century", "Journal", "Articles", "Field", "Notes", "Sample", "Summary",
];

pub(super) const MEASURES: &[&str] = &[
    "Height", "Weight", "Age", "Income", "Length", "Speed", "Price", "Demand", "Rainfall",
    "Yield", "Mass", "Volume", "Cost", "Time", "Score", "Size",
];

pub(super) const X_LABELS: &[&str] = &[
    "Month", "Year", "Region", "Category", "Group", "Week", "Decade", "Age Group", "Time",
    "Genre", "Country", "Quarter", "Site", "Day of Week", "Period",
];

pub(super) const Y_LABELS: &[&str] = &[
    "Count", "Frequency", "Percent", "Total", "Value", "Score", "Amount", "Rate", "Sales",
    "Word Count", "Visitors", "Mean Value", "Revenue", "Index",
];

pub(super) const CATEGORY_WORDS: &[&str] = &[
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec", "North",
    "South", "East", "West", "Alpha", "Beta", "Gamma", "Delta", "Omega", "Red", "Blue", "Green",
    "Apples", "Pears", "Plums", "Grapes", "Lemons", "Limes", "Kiwi", "Mango", "Cats", "Dogs",
    "Birds", "Fish", "Paris", "Rome", "Oslo", "Lima", "Cairo", "Tokyo", "Delhi", "Mon", "Tue",
    "Wed", "Thu", "Fri", "Sat", "Sun", "Q1", "Q2", "Q3", "Q4", "Iron", "Gold", "Zinc", "Copper",
    "Poems", "Plays", "Essays", "Maps", "Songs", "Films",
];

pub(super) const SERIES_WORDS: &[&str] = &[
    "Control", "Treated", "Urban", "Rural", "Male", "Female", "Before", "After", "Online",
    "Retail", "Spring", "Summer", "Autumn", "Winter", "Group A", "Group B", "Group C", "Men",
    "Women", "Fiction", "Poetry", "Drama", "Local", "Global", "Day", "Night",
];
