# Grouped bar chart template.
#
# To plot your own data:
#   1. Replace x_data with your categories and y_data with one row of values
#      per series (same order as series_names). With pandas:
#          df = pd.read_csv("my_data.csv", index_col=0)
#          x_data = df.columns.tolist()
#          y_data = df.to_numpy()
#          series_names = df.index.tolist()
#   2. Edit the title, axis labels and series names.
#   3. Run the cell.

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

# Figure size in inches as (width, height). Enlarge it for slides, shrink it for papers.
figsize = (8, 6)
title = "Language Museum"

# Categories along the x-axis and one bar per series inside each group.
x_data = ["Tue", "Blue", "Wed", "Dogs", "Lemons", "Tokyo", "Q1"]
series_names = ["Before", "Rural", "Winter", "After"]
# Placeholder values, shape (4, number of categories).
y_data = np.random.randint(1, 100, size=(len(series_names), len(x_data)))

x = x_data
y = y_data

fig, ax = plt.subplots(figsize=figsize)
positions = np.arange(len(x))
# Total width of one group; each series gets an equal share.
width = 0.8 / len(series_names)
for i, (name, values) in enumerate(zip(series_names, y)):
    ax.bar(positions + i * width, values, width, label=name)
ax.set_xticks(positions + width * (len(series_names) - 1) / 2)
ax.set_xticklabels(x)
ax.set_title(title)
ax.set_xlabel("Group")
ax.set_ylabel("Total")
ax.legend(loc="upper right")
plt.tight_layout()
plt.show()
